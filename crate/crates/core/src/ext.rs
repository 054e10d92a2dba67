//! `dim Ext¹(X,Y) = −⟨dim X, dim Y⟩` whenever `Hom(X,Y) = 0` is guaranteed
//! by the position of `X` and `Y` relative to the AR quiver.
//!
//! Covered cases: `X` regular and `Y` preprojective; `X` preinjective and
//! `Y` regular; both in the same directed component with a path `Y -> X`.
//! Everything else is refused.

use alloc::vec::Vec;

use crate::expr::{DimExpr, PolyN};
use crate::knit::{self, ComponentSide, KnitError};
use crate::quiver::Quiver;
use crate::roots::{self, DimClass, RootError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtError {
    #[error("case X {x}, Y {y} is not covered by the Ext lemma", x = .x.name(), y = .y.name())]
    HypothesisNotMet { x: DimClass, y: DimClass },
    #[error("no path from Y to X in the {} component", side_name(*.0))]
    NoPath(ComponentSide),
    #[error("dimension vector family could not be located in the {} component", side_name(*.0))]
    NotLocated(ComponentSide),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Knit(#[from] KnitError),
}

fn side_name(s: ComponentSide) -> &'static str {
    match s {
        ComponentSide::Preprojective => "preprojective",
        ComponentSide::Preinjective => "preinjective",
    }
}

/// Which hypothesis of the lemma was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ExtCase {
    RegularOverPreprojective,
    PreinjectiveOverRegular,
    PathInComponent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtValue {
    pub value: PolyN,
    pub x_class: DimClass,
    pub y_class: DimClass,
    pub case: ExtCase,
}

fn case_of(x: DimClass, y: DimClass) -> Result<Option<ExtCase>, ExtError> {
    use DimClass::*;
    match (x, y) {
        (Regular, Preprojective) => Ok(Some(ExtCase::RegularOverPreprojective)),
        (Preinjective, Regular) => Ok(Some(ExtCase::PreinjectiveOverRegular)),
        (Preprojective, Preprojective) | (Preinjective, Preinjective) => Ok(None),
        _ => Err(ExtError::HypothesisNotMet { x, y }),
    }
}

fn side_for(c: DimClass) -> ComponentSide {
    match c {
        DimClass::Preinjective => ComponentSide::Preinjective,
        _ => ComponentSide::Preprojective,
    }
}

/// Concrete version.
pub fn ext1_dim_via_euler(q: &Quiver, x: &[i64], y: &[i64]) -> Result<ExtValue, ExtError> {
    let (xc, _) = roots::classify_dim(q, x)?;
    let (yc, _) = roots::classify_dim(q, y)?;
    let case = match case_of(xc, yc)? {
        Some(c) => c,
        None => {
            let side = side_for(xc);
            let px = knit::locate(q, side, x)?.ok_or(ExtError::NotLocated(side))?;
            let py = knit::locate(q, side, y)?.ok_or(ExtError::NotLocated(side))?;
            let comp = knit::knit_component(q, side, px.0.max(py.0) + 1)?;
            if !knit::ar_path_exists(&comp, py, px)? {
                return Err(ExtError::NoPath(side));
            }
            ExtCase::PathInComponent
        }
    };
    let v = roots::euler_form(q, x, y)?;
    Ok(ExtValue { value: PolyN::constant(-v), x_class: xc, y_class: yc, case })
}

/// Symbolic version, valid for every `n >= n0`.
pub fn ext1_dim_via_euler_sym(q: &Quiver, x: &[DimExpr], y: &[DimExpr], n0: i64) -> Result<ExtValue, ExtError> {
    let (xc, _) = roots::classify_dim_sym(q, x, n0)?;
    let (yc, _) = roots::classify_dim_sym(q, y, n0)?;
    let case = match case_of(xc, yc)? {
        Some(c) => c,
        None => {
            let side = side_for(xc);
            let fx = knit::locate_family(q, side, x, n0)?.ok_or(ExtError::NotLocated(side))?;
            let fy = knit::locate_family(q, side, y, n0)?.ok_or(ExtError::NotLocated(side))?;
            if !knit::family_path_exists(q, &fy, &fx)? {
                return Err(ExtError::NoPath(side));
            }
            ExtCase::PathInComponent
        }
    };
    let v = roots::euler_form_sym(q, x, y);
    Ok(ExtValue { value: -v, x_class: xc, y_class: yc, case })
}

/// Helper for callers holding plain vectors.
pub fn constant(x: &[i64]) -> Vec<DimExpr> {
    roots::constant_vector(x)
}
