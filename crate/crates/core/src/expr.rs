//! Affine size expressions `a·n + b` and the quadratic polynomials in `n`
//! they generate under the Euler form.

use core::fmt;
use core::ops::{Add, Neg, Sub};

/// A block size `a·n + b` in the single formula parameter `n`.
///
/// Written formulas only use non-negative coefficients, but shifting a
/// formula to `n - c` lowers `b`, so `b` is signed. Every expression that is
/// used as a size must evaluate to a non-negative number on the parameter
/// range of the enclosing proof; see [`DimExpr::nonneg_from`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "(i64, i64)", from = "(i64, i64)"))]
pub struct DimExpr {
    pub a: i64,
    pub b: i64,
}

impl DimExpr {
    pub const ZERO: DimExpr = DimExpr { a: 0, b: 0 };
    pub const ONE: DimExpr = DimExpr { a: 0, b: 1 };
    pub const N: DimExpr = DimExpr { a: 1, b: 0 };

    pub const fn new(a: i64, b: i64) -> Self {
        DimExpr { a, b }
    }

    pub const fn constant(b: i64) -> Self {
        DimExpr { a: 0, b }
    }

    pub fn eval(self, n: i64) -> i64 {
        self.a * n + self.b
    }

    pub fn is_constant(self) -> bool {
        self.a == 0
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Substitutes `n - c` for `n`.
    pub fn shift(self, c: i64) -> Self {
        DimExpr { a: self.a, b: self.b - self.a * c }
    }

    /// Substitutes the concrete value `k` for `n`.
    pub fn fix(self, k: i64) -> Self {
        DimExpr::constant(self.eval(k))
    }

    /// True when the expression is `>= 0` for every `n >= n0`.
    pub fn nonneg_from(self, n0: i64) -> bool {
        self.a >= 0 && self.eval(n0) >= 0
    }

    /// True when `self <= other` for every `n >= n0`.
    pub fn le_from(self, other: DimExpr, n0: i64) -> bool {
        (other - self).nonneg_from(n0)
    }

    /// Order valid for every `n >= n0`: `Less` means `self <= other` there
    /// without being the same expression. `None` if the order flips.
    pub fn cmp_from(self, other: DimExpr, n0: i64) -> Option<core::cmp::Ordering> {
        use core::cmp::Ordering::*;
        if self == other {
            Some(Equal)
        } else if self.le_from(other, n0) {
            Some(Less)
        } else if other.le_from(self, n0) {
            Some(Greater)
        } else {
            None
        }
    }

    /// Smallest `n >= floor` from which the expression stays non-negative,
    /// or `None` if it eventually becomes negative.
    pub fn nonneg_threshold(self, floor: i64) -> Option<i64> {
        match self.a {
            0 if self.b >= 0 => Some(floor),
            0 => None,
            a if a > 0 => {
                // smallest n with a·n + b >= 0
                let t = (-self.b).div_euclid(a) + i64::from((-self.b).rem_euclid(a) != 0);
                Some(t.max(floor))
            }
            _ => None,
        }
    }
}

impl From<DimExpr> for (i64, i64) {
    fn from(d: DimExpr) -> (i64, i64) {
        (d.a, d.b)
    }
}

impl From<(i64, i64)> for DimExpr {
    fn from((a, b): (i64, i64)) -> DimExpr {
        DimExpr { a, b }
    }
}

impl Add for DimExpr {
    type Output = DimExpr;
    fn add(self, o: DimExpr) -> DimExpr {
        DimExpr { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for DimExpr {
    type Output = DimExpr;
    fn sub(self, o: DimExpr) -> DimExpr {
        DimExpr { a: self.a - o.a, b: self.b - o.b }
    }
}

impl core::iter::Sum for DimExpr {
    fn sum<I: Iterator<Item = DimExpr>>(iter: I) -> DimExpr {
        iter.fold(DimExpr::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for DimExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (0, b) => write!(f, "{b}"),
            (a, b) => {
                match a {
                    1 => write!(f, "n")?,
                    -1 => write!(f, "-n")?,
                    a => write!(f, "{a}n")?,
                }
                match b {
                    0 => Ok(()),
                    b if b > 0 => write!(f, "+{b}"),
                    b => write!(f, "{b}"),
                }
            }
        }
    }
}

/// `c2·n² + c1·n + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyN {
    pub c0: i64,
    pub c1: i64,
    pub c2: i64,
}

impl PolyN {
    pub const ZERO: PolyN = PolyN { c0: 0, c1: 0, c2: 0 };

    pub const fn new(c0: i64, c1: i64, c2: i64) -> Self {
        PolyN { c0, c1, c2 }
    }

    pub const fn constant(c0: i64) -> Self {
        PolyN { c0, c1: 0, c2: 0 }
    }

    pub fn eval(self, n: i64) -> i64 {
        self.c2 * n * n + self.c1 * n + self.c0
    }

    pub fn is_zero(self) -> bool {
        self == PolyN::ZERO
    }

    pub fn is_constant(self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn as_constant(self) -> Option<i64> {
        self.is_constant().then_some(self.c0)
    }

    /// Product, or `None` if the degree would exceed two.
    pub fn checked_mul(self, o: PolyN) -> Option<PolyN> {
        if (self.c2 != 0 && (o.c1 != 0 || o.c2 != 0)) || (o.c2 != 0 && self.c1 != 0) {
            return None;
        }
        Some(PolyN {
            c0: self.c0 * o.c0,
            c1: self.c0 * o.c1 + self.c1 * o.c0,
            c2: self.c0 * o.c2 + self.c1 * o.c1 + self.c2 * o.c0,
        })
    }

    pub fn scale(self, k: i64) -> PolyN {
        PolyN { c0: self.c0 * k, c1: self.c1 * k, c2: self.c2 * k }
    }
}

impl From<DimExpr> for PolyN {
    fn from(d: DimExpr) -> PolyN {
        PolyN { c0: d.b, c1: d.a, c2: 0 }
    }
}

impl Add for PolyN {
    type Output = PolyN;
    fn add(self, o: PolyN) -> PolyN {
        PolyN { c0: self.c0 + o.c0, c1: self.c1 + o.c1, c2: self.c2 + o.c2 }
    }
}

impl Sub for PolyN {
    type Output = PolyN;
    fn sub(self, o: PolyN) -> PolyN {
        PolyN { c0: self.c0 - o.c0, c1: self.c1 - o.c1, c2: self.c2 - o.c2 }
    }
}

impl Neg for PolyN {
    type Output = PolyN;
    fn neg(self) -> PolyN {
        self.scale(-1)
    }
}

impl core::iter::Sum for PolyN {
    fn sum<I: Iterator<Item = PolyN>>(iter: I) -> PolyN {
        iter.fold(PolyN::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for PolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = [(self.c2, "n^2"), (self.c1, "n"), (self.c0, "")];
        let mut first = true;
        for (c, var) in terms {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if c < 0 { " - " } else { " + " })?;
            }
            if mag != 1 || var.is_empty() {
                write!(f, "{mag}")?;
            }
            write!(f, "{var}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
