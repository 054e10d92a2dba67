//! The proof calculus.
//!
//! * [`endo`]: a concrete representation is exceptional once its
//!   endomorphism system has corank one over every field.
//! * [`ses`]: the four conditions for `0 -> Y -> Z -> X -> 0` to be exact.
//! * [`two_ses`]: the numeric hypotheses that make two such sequences
//!   force `Z` to be exceptional.
//! * [`prove`]: direct proofs, inductions over `n`, and the registry of
//!   certified formulas.

pub mod endo;
pub mod prove;
pub mod registry;
pub mod script;
pub mod ses;
pub mod two_ses;

use alloc::string::String;
use alloc::vec::Vec;

pub use endo::{build_endo_matrix, prove_end_dim_one, EndoCertificate, EndoError};
pub use prove::{prove, ProofRun, ProveOptions};
pub use registry::{Coverage, FormulaRegistry};
pub use script::{Formula, FormulaRef, Library, Method, Morphism, ProofScript, SesRef, Shift};
pub use ses::{verify_ses, SesCondition, SesFailure, SesInput, SesReport};
pub use two_ses::{verify_two_ses_hypotheses, HypothesisFailure, TwoSesReport};

/// How a refusal should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FailureKind {
    /// The claim is false or not covered by the calculus.
    Refused,
    /// A search ran out of budget; a larger budget may succeed.
    Budget,
    /// The input is inconsistent.
    Input,
}

impl core::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            FailureKind::Refused => "refused",
            FailureKind::Budget => "budget exhausted",
            FailureKind::Input => "input error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn refused(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Refused, message: message.into() }
    }

    pub fn budget(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Budget, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Input, message: message.into() }
    }
}

/// Runs independent jobs and returns their results in input order.
pub trait Executor: Sync {
    fn map<'a>(&self, jobs: Vec<Job<'a>>) -> Vec<JobOutput>;
}

pub type Job<'a> = alloc::boxed::Box<dyn FnOnce() -> JobOutput + Send + 'a>;

/// Steps and failures of one obligation.
#[derive(Debug, Clone, Default)]
pub struct JobOutput {
    pub steps: Vec<crate::trace::Step>,
    pub failures: Vec<Failure>,
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<'a>(&self, jobs: Vec<Job<'a>>) -> Vec<JobOutput> {
        jobs.into_iter().map(|j| j()).collect()
    }
}
