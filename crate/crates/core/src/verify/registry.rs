//! Which formulas are certified, and for which parameter values.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

/// Parameter values at which a formula is known to be exceptional.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coverage {
    /// Every `n >= k`.
    From(i64),
    /// Finitely many values.
    Points(BTreeSet<i64>),
}

impl Coverage {
    pub fn contains(&self, n: i64) -> bool {
        match self {
            Coverage::From(k) => n >= *k,
            Coverage::Points(p) => p.contains(&n),
        }
    }

    /// Every `n >= k` is covered.
    pub fn contains_from(&self, k: i64) -> bool {
        match self {
            Coverage::From(j) => k >= *j,
            Coverage::Points(_) => false,
        }
    }

    fn merge(&mut self, other: Coverage) {
        *self = match (core::mem::replace(self, Coverage::From(i64::MAX)), other) {
            (Coverage::From(a), Coverage::From(b)) => Coverage::From(a.min(b)),
            (Coverage::From(a), Coverage::Points(p)) | (Coverage::Points(p), Coverage::From(a)) => {
                // points just below the range extend it
                let mut a = a;
                while p.contains(&(a - 1)) {
                    a -= 1;
                }
                Coverage::From(a)
            }
            (Coverage::Points(mut p), Coverage::Points(q)) => {
                p.extend(q);
                Coverage::Points(p)
            }
        };
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub coverage: Coverage,
    /// Proofs that contributed.
    pub proofs: BTreeSet<String>,
}

/// Certified formulas. Entries only ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormulaRegistry {
    entries: BTreeMap<String, RegistryEntry>,
}

impl FormulaRegistry {
    pub fn certify(&mut self, formula: &str, coverage: Coverage, proof: &str) {
        match self.entries.get_mut(formula) {
            Some(e) => {
                e.coverage.merge(coverage);
                e.proofs.insert(proof.into());
            }
            None => {
                let mut proofs = BTreeSet::new();
                proofs.insert(proof.into());
                self.entries.insert(formula.into(), RegistryEntry { coverage, proofs });
            }
        }
    }

    pub fn get(&self, formula: &str) -> Option<&RegistryEntry> {
        self.entries.get(formula)
    }

    pub fn covers(&self, formula: &str, n: i64) -> bool {
        self.entries.get(formula).is_some_and(|e| e.coverage.contains(n))
    }

    pub fn covers_from(&self, formula: &str, k: i64) -> bool {
        self.entries.get(formula).is_some_and(|e| e.coverage.contains_from(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &RegistryEntry)> {
        self.entries.iter()
    }
}
