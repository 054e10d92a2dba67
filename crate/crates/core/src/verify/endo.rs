//! The linear system whose solutions are the endomorphisms of a concrete
//! representation.

use alloc::vec::Vec;

use crate::fi::{self, CertifyFailure, FiError, FiMatrix, RankCertificate};
use crate::quiver::{DimVector, Quiver};
use crate::rep::ConcreteRep;

/// Unknowns are the entries of every `f_i`, vertices in quiver order and
/// each `f_i` row-major. One row per entry of `M_α f_s − f_t M_α` for each
/// arrow in order, entries row-major.
pub fn build_endo_matrix(q: &Quiver, m: &ConcreteRep) -> FiMatrix {
    let d: Vec<usize> = m.dims.iter().map(|&x| x as usize).collect();
    let mut off = Vec::with_capacity(d.len());
    let mut unknowns = 0;
    for &x in &d {
        off.push(unknowns);
        unknowns += x * x;
    }
    let n_rows: usize = q.arrows().iter().map(|a| d[a.source] * d[a.target]).sum();
    let mut a = FiMatrix::zero(n_rows, unknowns);
    let mut row = 0;
    for (arrow, mat) in q.arrows().iter().zip(&m.mats) {
        let (s, t) = (arrow.source, arrow.target);
        let (ds, dt) = (d[s], d[t]);
        for r in 0..dt {
            for c in 0..ds {
                for k in 0..ds {
                    let v = mat.get(r, k);
                    if v != 0 {
                        a.set(row, off[s] + k * ds + c, crate::TriVal::from_int(i64::from(v)).expect("0/1"));
                    }
                }
                for k in 0..dt {
                    let v = mat.get(k, c);
                    if v != 0 {
                        a.set(row, off[t] + r * dt + k, crate::TriVal::from_int(-i64::from(v)).expect("0/1"));
                    }
                }
                row += 1;
            }
        }
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EndoError {
    #[error("dimension vector {0} equals the radical vector")]
    DimEqualsDelta(DimVector),
    #[error("endomorphism space has dimension {0}, not 1")]
    CorankNotOne(usize),
    #[error(transparent)]
    Fi(#[from] FiError),
}

impl EndoError {
    pub fn is_budget(&self) -> bool {
        matches!(self, EndoError::Fi(FiError::CannotCertify { reason: CertifyFailure::BudgetExhausted, .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoCertificate {
    pub matrix: FiMatrix,
    pub cert: RankCertificate,
}

/// `dim End = 1` over every field, and the dimension vector is not `δ`.
/// `delta` is `None` for quivers without a radical vector.
pub fn prove_end_dim_one(
    q: &Quiver,
    m: &ConcreteRep,
    delta: Option<&DimVector>,
    budget: u64,
) -> Result<EndoCertificate, EndoError> {
    if delta == Some(&m.dims) {
        return Err(EndoError::DimEqualsDelta(m.dims.clone()));
    }
    let matrix = build_endo_matrix(q, m);
    let cert = fi::fi_echelonize_with(&matrix, budget)?;
    match cert.corank() {
        1 => Ok(EndoCertificate { matrix, cert }),
        k => Err(EndoError::CorankNotOne(k)),
    }
}
