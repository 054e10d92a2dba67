//! The numeric hypotheses on two sequences `0 -> Y -> Z -> X -> 0` and
//! `0 -> Y' -> Z -> X' -> 0` under which `Z` is exceptional: both pairs are
//! Schofield pairs for `dim Z`, the pairs are not isomorphic, and
//! `dim Ext¹(X,Y) = dim Ext¹(X',Y') = 1`. Exactness of the sequences is
//! checked separately.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{DimExpr, PolyN};
use crate::ext::{self, ExtError};
use crate::quiver::Quiver;
use crate::roots::{self, SchofieldOrder};
use crate::trace::{Snapshot, Step};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypothesisFailure {
    /// Pair `k` (0 or 1) is not a Schofield pair; the failed clauses.
    NotSchofield { pair: usize, clauses: Vec<roots::SchofieldClause> },
    /// Both pairs have the same dimension vectors for some `n`.
    SamePair,
    /// `dim Ext¹(X,Y)` is not identically 1.
    ExtNotOne { pair: usize, value: PolyN },
    /// The Ext lemma does not cover this pair.
    Ext { pair: usize, error: ExtError },
}

impl HypothesisFailure {
    pub fn message(&self) -> String {
        match self {
            HypothesisFailure::NotSchofield { pair, clauses } => {
                let parts: Vec<&str> = clauses.iter().map(|c| c.describe()).collect();
                format!("pair {} is not a Schofield pair: {}", pair + 1, parts.join("; "))
            }
            HypothesisFailure::SamePair => "the two pairs have equal dimension vectors".into(),
            HypothesisFailure::ExtNotOne { pair, value } => {
                format!("pair {}: dim Ext^1(X,Y) = {value}, not 1", pair + 1)
            }
            HypothesisFailure::Ext { pair, error } => format!("pair {}: {error}", pair + 1),
        }
    }

    /// Whether this is a lemma refusal rather than a false claim.
    pub fn is_hypothesis_not_met(&self) -> bool {
        matches!(self, HypothesisFailure::Ext { error: ExtError::HypothesisNotMet { .. }, .. })
    }
}

#[derive(Debug, Clone, Default)]
pub struct TwoSesReport {
    pub failures: Vec<HypothesisFailure>,
    pub steps: Vec<Step>,
}

impl TwoSesReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `x - y` is nonzero at every `n >= n0`.
fn differs_everywhere(x: DimExpr, y: DimExpr, n0: i64) -> bool {
    let d = x - y;
    match d.a {
        0 => d.b != 0,
        a => {
            // the only root is -b/a
            d.b % a != 0 || -d.b / a < n0
        }
    }
}

/// `pairs[k] = (dim X, dim Y)`, quotient first.
pub fn verify_two_ses_hypotheses(
    q: &Quiver,
    pairs: [(&[DimExpr], &[DimExpr]); 2],
    z: &[DimExpr],
    order: SchofieldOrder,
    n0: i64,
) -> TwoSesReport {
    let mut r = TwoSesReport::default();
    r.steps.push(Step::section("Hypotheses on the two pairs"));
    for (k, (x, y)) in pairs.iter().enumerate() {
        let rep = roots::schofield_pair_check_sym(q, x, y, z, order, n0);
        r.steps.push(
            Step::check(
                format!("Pair {}: Schofield pair for dim Z", k + 1),
                format!("<dim Y, dim X> = {}, <dim X, dim Y> = {}", rep.sub_quot, rep.quot_sub),
                rep.ok(),
            )
            .with_inputs(vec![
                Snapshot::Dims { label: format!("dim X{}", primes(k)), dims: x.to_vec() },
                Snapshot::Dims { label: format!("dim Y{}", primes(k)), dims: y.to_vec() },
            ]),
        );
        if !rep.ok() {
            r.failures.push(HypothesisFailure::NotSchofield { pair: k, clauses: rep.failed });
        }
    }
    let (p, p2) = (pairs[0], pairs[1]);
    let distinct = p.0.iter().zip(p2.0).any(|(a, b)| differs_everywhere(*a, *b, n0))
        || p.1.iter().zip(p2.1).any(|(a, b)| differs_everywhere(*a, *b, n0));
    r.steps.push(Step::check("The pairs are not isomorphic", "dim X differs from dim X' or dim Y from dim Y'", distinct));
    if !distinct {
        r.failures.push(HypothesisFailure::SamePair);
    }
    for (k, (x, y)) in pairs.iter().enumerate() {
        match ext::ext1_dim_via_euler_sym(q, x, y, n0) {
            Ok(v) => {
                let holds = v.value == PolyN::constant(1);
                r.steps.push(Step::check(
                    format!("Pair {}: dim Ext^1(X{p},Y{p}) = -<dim X{p}, dim Y{p}>", k + 1, p = primes(k)),
                    format!("X {}, Y {}, value {}", v.x_class.name(), v.y_class.name(), v.value),
                    holds,
                ));
                if !holds {
                    r.failures.push(HypothesisFailure::ExtNotOne { pair: k, value: v.value });
                }
            }
            Err(error) => {
                r.steps.push(Step::check(format!("Pair {}: Ext lemma", k + 1), format!("{error}"), false));
                r.failures.push(HypothesisFailure::Ext { pair: k, error });
            }
        }
    }
    r
}

fn primes(k: usize) -> &'static str {
    if k == 0 {
        ""
    } else {
        "'"
    }
}
