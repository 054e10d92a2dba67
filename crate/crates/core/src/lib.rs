//! Field-independent certification of tree modules over tame quivers.
//!
//! Everything here is exact integer arithmetic. Matrices that enter a
//! certificate only ever hold entries in `{-1, 0, 1}` and are transformed
//! with `±1` multipliers, so a certificate is valid over every field.
//!
//! The crate is `no_std` with `alloc`. File formats, the command line and
//! parallel scheduling live in the companion `qtp` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod block;
pub mod block_rank;
pub mod expr;
pub mod ext;
pub mod fi;
pub mod knit;
pub mod quiver;
pub mod rep;
pub mod roots;
pub mod trace;
pub mod verify;

pub use block::{Block, BlockError, BlockMatrix, Combo, Sym};
pub use expr::{DimExpr, PolyN};
pub use fi::{FiError, FiMatrix, RankCertificate, TriVal};
pub use quiver::{Automorphism, DimVector, IntMatrix, Quiver, QuiverError};
pub use rep::{ConcreteRep, Representation};

/// Default node budget for the backtracking searches.
pub const DEFAULT_BACKTRACK_LIMIT: u64 = 10_000;

/// Which rank is being certified: all columns or all rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Column,
    Row,
}
