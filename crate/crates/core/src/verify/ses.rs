//! Exactness of `0 -> Y -f-> Z -g-> X -> 0`:
//!
//! * (a) every `f_i` has full column rank and every `g_i` full row rank;
//! * (b) `f_t Y_α = Z_α f_s` and `g_t Z_α = X_α g_s` for every arrow;
//! * (c) `g_i f_i = 0` for every vertex;
//! * (d) `dim Z = dim X + dim Y`, and every map has the right shape.
//!
//! A map with the wrong shape is reported under (d) and the other checks
//! that involve it are skipped.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{Failure, FailureKind};
use crate::block::{self, BlockError, BlockMatrix, ComboMatrix};
use crate::block_rank::{bm_full_rank_check, BlockRankError};
use crate::fi::{self, CertifyFailure, FiError, FiMatrix};
use crate::quiver::Quiver;
use crate::rep::{MorphismFamily, Representation};
use crate::trace::{self, Operation, Snapshot, Step, StepKind};
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SesCondition {
    A,
    B,
    C,
    D,
}

impl fmt::Display for SesCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SesCondition::A => "(a)",
            SesCondition::B => "(b)",
            SesCondition::C => "(c)",
            SesCondition::D => "(d)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SesFailure {
    pub condition: SesCondition,
    /// A vertex or arrow name.
    pub location: String,
    pub message: String,
    pub kind: FailureKind,
}

impl SesFailure {
    pub fn to_failure(&self, label: &str) -> Failure {
        Failure {
            kind: self.kind,
            message: format!("{label}: condition {} fails at {}: {}", self.condition, self.location, self.message),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SesReport {
    pub failures: Vec<SesFailure>,
    pub steps: Vec<Step>,
}

impl SesReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn conditions(&self) -> Vec<SesCondition> {
        let mut c: Vec<SesCondition> = self.failures.iter().map(|f| f.condition).collect();
        c.sort();
        c.dedup();
        c
    }
}

/// One sequence with all references already resolved.
#[derive(Debug, Clone, Copy)]
pub struct SesInput<'a> {
    pub quiver: &'a Quiver,
    pub sub: &'a Representation,
    pub mid: &'a Representation,
    pub quot: &'a Representation,
    pub f: &'a MorphismFamily,
    pub g: &'a MorphismFamily,
    /// The checks must hold for every `n >= n_min`.
    pub n_min: i64,
    pub budget: u64,
}

struct Ctx<'a> {
    inp: SesInput<'a>,
    concrete: bool,
    report: SesReport,
}

impl Ctx<'_> {
    fn fail(&mut self, condition: SesCondition, location: &str, message: impl Into<String>, kind: FailureKind) {
        let message = message.into();
        self.report.steps.push(Step::check(
            format!("Condition {condition} at {location}"),
            message.clone(),
            false,
        ));
        self.report.failures.push(SesFailure { condition, location: location.to_string(), message, kind });
    }

    fn at(&self, m: &BlockMatrix) -> Result<FiMatrix, BlockError> {
        block::instantiate(m, self.inp.n_min)
    }
}

fn all_constant(inp: &SesInput<'_>) -> bool {
    inp.sub.is_constant()
        && inp.mid.is_constant()
        && inp.quot.is_constant()
        && inp.f.maps.iter().chain(&inp.g.maps).all(|m| m.is_constant())
}

/// Checks all four conditions; never stops at the first failure.
pub fn verify_ses(inp: SesInput<'_>) -> SesReport {
    let q = inp.quiver;
    let mut cx = Ctx { inp, concrete: all_constant(&inp), report: SesReport::default() };
    let nv = q.n_vertices();
    if inp.f.maps.len() != nv || inp.g.maps.len() != nv {
        cx.fail(SesCondition::D, "*", "a morphism does not have one map per vertex", FailureKind::Input);
        return cx.report;
    }

    // (d)
    cx.report.steps.push(Step::section("Condition (d): dimensions and shapes"));
    cx.report.steps.push(Step::note("dim Z = dim X + dim Y").with_inputs(vec![
        Snapshot::Dims { label: "dim Y".into(), dims: inp.sub.dims().to_vec() },
        Snapshot::Dims { label: "dim Z".into(), dims: inp.mid.dims().to_vec() },
        Snapshot::Dims { label: "dim X".into(), dims: inp.quot.dims().to_vec() },
    ]));
    for v in 0..nv {
        let (y, z, x) = (inp.sub.dims()[v], inp.mid.dims()[v], inp.quot.dims()[v]);
        if x + y != z {
            let name = q.vertices()[v].clone();
            cx.fail(SesCondition::D, &name, format!("dim Z = {z} but dim X + dim Y = {}", x + y), FailureKind::Refused);
        }
    }
    let mut f_ok = vec![true; nv];
    let mut g_ok = vec![true; nv];
    for (v, e) in inp.f.shape_errors(q, inp.sub.dims(), inp.mid.dims()) {
        f_ok[v] = false;
        cx.fail(SesCondition::D, &q.vertices()[v].clone(), format!("f: {e}"), FailureKind::Refused);
    }
    for (v, e) in inp.g.shape_errors(q, inp.mid.dims(), inp.quot.dims()) {
        g_ok[v] = false;
        cx.fail(SesCondition::D, &q.vertices()[v].clone(), format!("g: {e}"), FailureKind::Refused);
    }

    // (a)
    cx.report.steps.push(Step::section("Condition (a): f injective, g surjective"));
    for v in 0..nv {
        let name = q.vertices()[v].clone();
        if f_ok[v] {
            rank_check(&mut cx, &format!("f_{name}"), &name, &inp.f.maps[v], Side::Column);
        }
        if g_ok[v] {
            rank_check(&mut cx, &format!("g_{name}"), &name, &inp.g.maps[v], Side::Row);
        }
    }

    // (b)
    cx.report.steps.push(Step::section("Condition (b): f and g commute with the arrows"));
    for (k, arrow) in q.arrows().iter().enumerate() {
        let (s, t) = (arrow.source, arrow.target);
        let (sn, tn) = (&q.vertices()[s], &q.vertices()[t]);
        if f_ok[s] && f_ok[t] {
            commute(
                &mut cx,
                &arrow.id,
                (&format!("f_{tn}"), &inp.f.maps[t]),
                (&format!("Y_{}", arrow.id), inp.sub.matrix(k)),
                (&format!("Z_{}", arrow.id), inp.mid.matrix(k)),
                (&format!("f_{sn}"), &inp.f.maps[s]),
            );
        }
        if g_ok[s] && g_ok[t] {
            commute(
                &mut cx,
                &arrow.id,
                (&format!("g_{tn}"), &inp.g.maps[t]),
                (&format!("Z_{}", arrow.id), inp.mid.matrix(k)),
                (&format!("X_{}", arrow.id), inp.quot.matrix(k)),
                (&format!("g_{sn}"), &inp.g.maps[s]),
            );
        }
    }

    // (c)
    cx.report.steps.push(Step::section("Condition (c): g f = 0"));
    for v in 0..nv {
        if !(f_ok[v] && g_ok[v]) {
            continue;
        }
        let name = q.vertices()[v].clone();
        let (gl, fl) = (format!("g_{name}"), format!("f_{name}"));
        match product(&cx, (&gl, &inp.g.maps[v]), (&fl, &inp.f.maps[v])) {
            Ok((p, step)) => {
                cx.report.steps.push(step);
                let holds = p.is_zero();
                cx.report.steps.push(Step::check(format!("At {name}"), format!("{gl} {fl} = 0"), holds));
                if !holds {
                    cx.report.failures.push(SesFailure {
                        condition: SesCondition::C,
                        location: name,
                        message: format!("{gl} {fl} is not zero"),
                        kind: FailureKind::Refused,
                    });
                }
            }
            Err(e) => cx.fail(SesCondition::C, &name, format!("cannot form {gl} {fl}: {e}"), FailureKind::Refused),
        }
    }
    cx.report
}

fn rank_check(cx: &mut Ctx<'_>, label: &str, loc: &str, m: &BlockMatrix, side: Side) {
    let what = match side {
        Side::Column => "full column rank",
        Side::Row => "full row rank",
    };
    if cx.concrete {
        let fm = match cx.at(m) {
            Ok(x) => x,
            Err(e) => return cx.fail(SesCondition::A, loc, format!("{label}: {e}"), FailureKind::Input),
        };
        match fi::fi_full_rank_check(&fm, side, cx.inp.budget) {
            Ok(cert) => {
                let steps = trace::echelon_steps(label, &fm, &cert.ops).expect("certificate replays");
                if steps.is_empty() {
                    cx.report.steps.push(
                        Step::note(format!("{label} is already in echelon form"))
                            .with_inputs(vec![Snapshot::Fi { label: label.into(), matrix: fm }]),
                    );
                } else {
                    cx.report.steps.extend(steps);
                }
                cx.report.steps.push(Step::check(format!("{label} has {what}"), format!("rank {}", cert.rank), true));
            }
            Err(FiError::CannotCertify { reason: CertifyFailure::BudgetExhausted, diagnostic }) => {
                cx.fail(SesCondition::A, loc, format!("{label}: budget exhausted ({diagnostic})"), FailureKind::Budget)
            }
            Err(e) => cx.fail(SesCondition::A, loc, format!("{label} does not have {what}: {e}"), FailureKind::Refused),
        }
    } else {
        match bm_full_rank_check(m, side, cx.inp.budget) {
            Ok(cert) => {
                let steps = trace::block_echelon_steps(label, &cert);
                if steps.is_empty() {
                    cx.report.steps.push(
                        Step::note(format!("{label} already has its pivots isolated"))
                            .with_inputs(vec![Snapshot::Block { label: label.into(), matrix: m.clone() }]),
                    );
                } else {
                    cx.report.steps.extend(steps);
                }
                cx.report.steps.push(Step::check(
                    format!("{label} has {what}"),
                    format!("{} invertible pivot blocks", cert.pivots.len()),
                    true,
                ));
            }
            Err(BlockRankError::BudgetExhausted(b)) => {
                cx.fail(SesCondition::A, loc, format!("{label}: budget of {b} nodes exhausted"), FailureKind::Budget)
            }
            Err(e) => cx.fail(SesCondition::A, loc, format!("{label} does not have {what}: {e}"), FailureKind::Refused),
        }
    }
}

/// Product of two maps, as a combination matrix, with its trace step.
fn product(cx: &Ctx<'_>, a: (&str, &BlockMatrix), b: (&str, &BlockMatrix)) -> Result<(ComboMatrix, Step), String> {
    let caption = format!("{} {}", a.0, b.0);
    if cx.concrete {
        let (fa, fb) = (cx.at(a.1).map_err(|e| e.to_string())?, cx.at(b.1).map_err(|e| e.to_string())?);
        let p = fi::int_mul(&fa, &fb).map_err(|e| e.to_string())?;
        let (r, c) = (fa.rows(), fb.cols());
        let step = Step {
            kind: StepKind::Product,
            caption,
            inputs: vec![Snapshot::Fi { label: a.0.into(), matrix: fa }, Snapshot::Fi { label: b.0.into(), matrix: fb }],
            operation: Operation::None,
            outputs: vec![Snapshot::Int { label: format!("{} {}", a.0, b.0), rows: r, cols: c, entries: p.clone() }],
        };
        Ok((int_as_combo(r, c, &p), step))
    } else {
        let (ca, cb) = (a.1.to_combo(), b.1.to_combo());
        let (p, detail, refined) = block::mul_refined(&ca, &cb, cx.inp.n_min).map_err(|e| e.to_string())?;
        let (ia, ib) = refined.unwrap_or((ca, cb));
        let step = Step {
            kind: StepKind::Product,
            caption,
            inputs: vec![Snapshot::Combo { label: a.0.into(), matrix: ia }, Snapshot::Combo { label: b.0.into(), matrix: ib }],
            operation: Operation::Product { detail },
            outputs: vec![Snapshot::Combo { label: format!("{} {}", a.0, b.0), matrix: p.clone() }],
        };
        Ok((p, step))
    }
}

/// A concrete integer matrix as a grid of `1 x 1` cells.
fn int_as_combo(r: usize, c: usize, v: &[i64]) -> ComboMatrix {
    ComboMatrix {
        rows: vec![crate::DimExpr::ONE; r],
        cols: vec![crate::DimExpr::ONE; c],
        grid: v.iter().map(|&x| crate::Combo { ci: x, ce: 0 }).collect(),
    }
}

/// Checks `l1 l2 = r1 r2`.
fn commute(
    cx: &mut Ctx<'_>,
    arrow: &str,
    l1: (&str, &BlockMatrix),
    l2: (&str, &BlockMatrix),
    r1: (&str, &BlockMatrix),
    r2: (&str, &BlockMatrix),
) {
    let statement = format!("{} {} = {} {}", l1.0, l2.0, r1.0, r2.0);
    let left = product(cx, l1, l2);
    let right = product(cx, r1, r2);
    let (left, right) = match (left, right) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => {
            return cx.fail(SesCondition::B, arrow, format!("cannot form {statement}: {e}"), FailureKind::Refused)
        }
    };
    cx.report.steps.push(left.1);
    cx.report.steps.push(right.1);
    match block::equal_refined(&left.0, &right.0, cx.inp.n_min) {
        Ok(true) => cx.report.steps.push(Step::check(format!("Arrow {arrow}"), statement, true)),
        Ok(false) => cx.fail(SesCondition::B, arrow, format!("{statement} does not hold"), FailureKind::Refused),
        Err(e) => cx.fail(SesCondition::B, arrow, format!("cannot compare {statement}: {e}"), FailureKind::Refused),
    }
}
