//! Formulas, morphisms and proof scripts with names resolved against one
//! quiver each.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::quiver::{Automorphism, Quiver};
use crate::rep::{self, MorphismFamily, Representation};

/// Which parameter value a reference uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shift {
    /// `n` itself.
    Same,
    /// `n - c` with `c >= 1`.
    Minus(i64),
    /// A fixed value.
    At(i64),
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::Same => Ok(()),
            Shift::Minus(c) => write!(f, "@n-{c}"),
            Shift::At(k) => write!(f, "@{k}"),
        }
    }
}

/// `formula[@shift] [permuted(...)]`. The permutation pairs `i -> j` mean
/// `σ(i) = j` and may name vertices or arrows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaRef {
    pub formula: String,
    pub shift: Shift,
    pub perm: Vec<(String, String)>,
}

impl FormulaRef {
    pub fn plain(formula: impl Into<String>) -> Self {
        FormulaRef { formula: formula.into(), shift: Shift::Same, perm: Vec::new() }
    }
}

impl fmt::Display for FormulaRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.formula, self.shift)?;
        if !self.perm.is_empty() {
            let parts: Vec<String> = self.perm.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
            write!(f, " permuted({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// One short exact sequence `0 -> sub -f-> target -g-> quot -> 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SesRef {
    pub sub: FormulaRef,
    pub quot: FormulaRef,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Method {
    One { n: i64 },
    Two { base: Vec<i64>, pairs: [SesRef; 2] },
    Three { pairs: [SesRef; 2] },
}

impl Method {
    pub fn number(&self) -> u8 {
        match self {
            Method::One { .. } => 1,
            Method::Two { .. } => 2,
            Method::Three { .. } => 3,
        }
    }

    pub fn pairs(&self) -> Option<&[SesRef; 2]> {
        match self {
            Method::One { .. } => None,
            Method::Two { pairs, .. } | Method::Three { pairs } => Some(pairs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProofScript {
    pub id: String,
    pub target: String,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Formula {
    pub quiver: String,
    pub rep: Representation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub quiver: String,
    pub source: FormulaRef,
    pub target: FormulaRef,
    pub family: MorphismFamily,
}

/// Everything a proof may cite.
#[derive(Debug, Clone, Default)]
pub struct Library {
    pub quivers: BTreeMap<String, Quiver>,
    pub formulas: BTreeMap<String, Formula>,
    pub morphisms: BTreeMap<String, Morphism>,
    pub proofs: BTreeMap<String, ProofScript>,
}

impl Library {
    pub fn formula(&self, id: &str) -> Result<&Formula, String> {
        self.formulas.get(id).ok_or_else(|| format!("unknown formula {id}"))
    }

    pub fn quiver_of(&self, formula: &str) -> Result<&Quiver, String> {
        let f = self.formula(formula)?;
        self.quivers.get(&f.quiver).ok_or_else(|| format!("unknown quiver {}", f.quiver))
    }

    pub fn automorphism(&self, r: &FormulaRef) -> Result<Automorphism, String> {
        let q = self.quiver_of(&r.formula)?;
        q.automorphism(&r.perm).map_err(|e| format!("{r}: {e}"))
    }

    /// The representation a reference denotes.
    pub fn resolve(&self, r: &FormulaRef) -> Result<Representation, String> {
        let f = self.formula(&r.formula)?;
        let q = self.quiver_of(&r.formula)?;
        let mut m = f.rep.clone();
        if !r.perm.is_empty() {
            let sigma = self.automorphism(r)?;
            m = rep::permute_representation(q, &m, &sigma).map_err(|e| format!("{r}: {e}"))?;
        }
        Ok(match r.shift {
            Shift::Same => m,
            Shift::Minus(c) => m.shift(c),
            Shift::At(k) => m.fix(k),
        })
    }

    /// Two references denote the same representation.
    pub fn same_ref(&self, a: &FormulaRef, b: &FormulaRef) -> Result<bool, String> {
        Ok(a.formula == b.formula && a.shift == b.shift && self.automorphism(a)? == self.automorphism(b)?)
    }

    /// The proof whose target is `formula`, if any.
    pub fn proof_for(&self, formula: &str) -> Option<&ProofScript> {
        self.proofs.values().find(|p| p.target == formula)
    }
}
