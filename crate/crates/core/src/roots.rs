//! Euler form, Cartan and Coxeter matrices, the radical vector `δ` and the
//! numeric root tests, both for concrete vectors and for vectors of affine
//! expressions in `n`.
//!
//! Dimension vectors are rows; the Coxeter matrix acts on them as columns,
//! `Φ · xᵗ`. [`coxeter_apply`] is the one place that does this.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{DimExpr, PolyN};
use crate::quiver::{DimVector, IntMatrix, Quiver, QuiverError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error("quiver is not of tame type (radical of rank {0})")]
    NotTame(usize),
    #[error("{0} is not a positive root")]
    NotPositiveRoot(DimVector),
    #[error("depth {s} at vertex {i} gives a vector with a negative entry")]
    NegativeEntry { s: i64, i: usize },
    #[error("integer overflow")]
    Overflow,
}

fn ovf<T>(x: Option<T>) -> Result<T, RootError> {
    x.ok_or(RootError::Overflow)
}

/// `⟨x,y⟩ = Σ x_i y_i − Σ_α x_{s(α)} y_{t(α)}`.
pub fn euler_form(q: &Quiver, x: &[i64], y: &[i64]) -> Result<i64, RootError> {
    q.check_len(x)?;
    q.check_len(y)?;
    let mut acc: i64 = 0;
    for (a, b) in x.iter().zip(y) {
        acc = ovf(acc.checked_add(ovf(a.checked_mul(*b))?))?;
    }
    for a in q.arrows() {
        acc = ovf(acc.checked_sub(ovf(x[a.source].checked_mul(y[a.target]))?))?;
    }
    Ok(acc)
}

pub fn tits_form(q: &Quiver, x: &[i64]) -> Result<i64, RootError> {
    euler_form(q, x, x)
}

/// `C[i][j]` = number of paths from `j` to `i`, so column `j` is `dim P(j)`.
pub fn cartan_matrix(q: &Quiver) -> IntMatrix {
    let n = q.n_vertices();
    let mut c = IntMatrix::zero(n, n);
    let order = q.topological_order();
    for j in 0..n {
        c[(j, j)] = 1;
        for &i in order {
            if i == j {
                continue;
            }
            let count: i64 = q.arrows_into(i).map(|a| c[(a.source, j)]).sum();
            c[(i, j)] = count;
        }
    }
    c
}

/// `C⁻¹ = I − A` with `A[i][j]` the number of arrows `j -> i`.
pub fn cartan_inverse(q: &Quiver) -> IntMatrix {
    let n = q.n_vertices();
    IntMatrix::identity(n).checked_sub(&q.adjacency()).expect("small entries")
}

/// `Φ = −Cᵗ C⁻¹`.
pub fn coxeter_matrix(q: &Quiver) -> Result<IntMatrix, RootError> {
    let c = cartan_matrix(q);
    Ok(ovf(c.transpose().checked_mul(&cartan_inverse(q)))?.neg())
}

/// `Φ⁻¹ = −C C⁻ᵗ`.
pub fn coxeter_inverse(q: &Quiver) -> Result<IntMatrix, RootError> {
    let c = cartan_matrix(q);
    Ok(ovf(c.checked_mul(&cartan_inverse(q).transpose()))?.neg())
}

/// `Φ^s · xᵗ` for any integer `s`.
pub fn coxeter_apply(q: &Quiver, x: &[i64], s: i64) -> Result<Vec<i64>, RootError> {
    q.check_len(x)?;
    let m = if s >= 0 { coxeter_matrix(q)? } else { coxeter_inverse(q)? };
    let mut v = x.to_vec();
    for _ in 0..s.unsigned_abs() {
        v = ovf(m.checked_apply(&v))?;
    }
    Ok(v)
}

/// Gram matrix of `(x,y) = ⟨x,y⟩ + ⟨y,x⟩`.
pub fn symmetrized_form(q: &Quiver) -> IntMatrix {
    let n = q.n_vertices();
    let mut m = IntMatrix::identity(n);
    for i in 0..n {
        m[(i, i)] = 2;
    }
    for a in q.arrows() {
        m[(a.source, a.target)] -= 1;
        m[(a.target, a.source)] -= 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuiverKind {
    /// Positive definite Tits form.
    Dynkin,
    /// Connected, positive semi-definite with radical `Zδ`.
    Tame,
    /// Everything else (wild or disconnected).
    Other,
}

/// Leading principal minors of a symmetric matrix, by fraction-free
/// elimination. Returns `None` if some minor is not positive.
fn positive_definite(m: &IntMatrix, keep: &[usize]) -> bool {
    let n = keep.len();
    let mut a: Vec<Vec<i128>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| i128::from(m[(i, j)])).collect())
        .collect();
    let mut prev: i128 = 1;
    for k in 0..n {
        if a[k][k] <= 0 {
            return false;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    true
}

/// Primitive integer kernel basis when the kernel of `m` has rank one.
/// Returns the kernel rank and, if it is one, a generator with a positive
/// first nonzero entry.
fn integer_kernel(m: &IntMatrix) -> (usize, Option<Vec<i64>>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<i128>> = (0..rows).map(|i| m.row(i).iter().map(|&x| i128::from(x)).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, p);
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let (f, g) = (a[r][c], a[i][c]);
                for j in 0..cols {
                    a[i][j] = a[i][j] * f - a[r][j] * g;
                }
                let d = a[i].iter().fold(0i128, |d, &x| gcd(d, x));
                if d > 1 {
                    a[i].iter_mut().for_each(|x| *x /= d);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let nullity = cols - pivots.len();
    if nullity != 1 {
        return (nullity, None);
    }
    let free = (0..cols).find(|c| !pivots.contains(c)).unwrap();
    let l = pivots.iter().enumerate().fold(1i128, |l, (k, &c)| lcm(l, a[k][c]));
    let mut x = vec![0i128; cols];
    x[free] = l;
    for (k, &c) in pivots.iter().enumerate() {
        x[c] = -a[k][free] * l / a[k][c];
    }
    let g = x.iter().fold(0i128, |d, &v| gcd(d, v));
    let sign = if x.iter().find(|&&v| v != 0).copied().unwrap_or(1) < 0 { -1 } else { 1 };
    let v = x.iter().map(|&v| i64::try_from(sign * v / g).unwrap_or(0)).collect();
    (1, Some(v))
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: i128, b: i128) -> i128 {
    (a / gcd(a, b) * b).abs()
}

pub fn quiver_kind(q: &Quiver) -> QuiverKind {
    let s = symmetrized_form(q);
    let all: Vec<usize> = (0..q.n_vertices()).collect();
    if positive_definite(&s, &all) {
        return QuiverKind::Dynkin;
    }
    match integer_kernel(&s) {
        (1, Some(d)) if d.iter().all(|&x| x > 0) => {
            // a vertex with δ_v = 1 is an extending vertex; removing it must
            // leave a positive definite form
            let v = d.iter().position(|&x| x == 1);
            match v {
                Some(v) => {
                    let rest: Vec<usize> = all.into_iter().filter(|&i| i != v).collect();
                    if positive_definite(&s, &rest) {
                        QuiverKind::Tame
                    } else {
                        QuiverKind::Other
                    }
                }
                None => QuiverKind::Other,
            }
        }
        _ => QuiverKind::Other,
    }
}

/// The positive primitive generator of the radical.
pub fn radical_delta(q: &Quiver) -> Result<DimVector, RootError> {
    match integer_kernel(&symmetrized_form(q)) {
        (1, Some(d)) if quiver_kind(q) == QuiverKind::Tame => Ok(DimVector(d)),
        (1, _) => Err(RootError::NotTame(1)),
        (k, _) => Err(RootError::NotTame(k)),
    }
}

/// `∂(x) = ⟨δ, x⟩`.
pub fn defect(q: &Quiver, x: &[i64]) -> Result<i64, RootError> {
    let d = radical_delta(q)?;
    euler_form(q, &d, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DimClass {
    Preprojective,
    Preinjective,
    Regular,
}

impl DimClass {
    pub fn from_defect(d: i64) -> DimClass {
        match d {
            d if d < 0 => DimClass::Preprojective,
            d if d > 0 => DimClass::Preinjective,
            _ => DimClass::Regular,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DimClass::Preprojective => "preprojective",
            DimClass::Preinjective => "preinjective",
            DimClass::Regular => "regular",
        }
    }
}

/// Classifies a positive root of a tame quiver by the sign of its defect.
pub fn classify_dim(q: &Quiver, x: &[i64]) -> Result<(DimClass, i64), RootError> {
    let delta = radical_delta(q)?;
    let v = DimVector(x.to_vec());
    let t = tits_form(q, x)?;
    let is_root = v.is_positive() && (t == 1 || (t == 0 && is_multiple_of(&v, &delta)));
    if !is_root {
        return Err(RootError::NotPositiveRoot(v));
    }
    let d = euler_form(q, &delta, x)?;
    Ok((DimClass::from_defect(d), d))
}

fn is_multiple_of(x: &DimVector, d: &DimVector) -> bool {
    let Some(k) = d.iter().position(|&v| v != 0).map(|i| x[i] / d[i]) else { return false };
    k > 0 && x.iter().zip(d.iter()).all(|(a, b)| *a == k * b)
}

/// Real root test with the extra condition for regular roots of tame
/// quivers: a regular exceptional root lies below `δ`.
pub fn is_exceptional_root(q: &Quiver, x: &[i64]) -> bool {
    if q.check_len(x).is_err() {
        return false;
    }
    let v = DimVector(x.to_vec());
    if !v.is_positive() || tits_form(q, x) != Ok(1) {
        return false;
    }
    match quiver_kind(q) {
        QuiverKind::Dynkin => true,
        QuiverKind::Tame => {
            let delta = radical_delta(q).expect("tame");
            match euler_form(q, &delta, x) {
                Ok(0) => v.le(&delta) && v != delta,
                Ok(_) => true,
                Err(_) => false,
            }
        }
        QuiverKind::Other => false,
    }
}

/// `dim P(s,i) = Φ^{−s} · dim P(i)`.
pub fn preproj_dim(q: &Quiver, s: i64, i: usize) -> Result<DimVector, RootError> {
    let p = cartan_matrix(q).col(i);
    let v = DimVector(coxeter_apply(q, &p, -s)?);
    if v.is_nonnegative() {
        Ok(v)
    } else {
        Err(RootError::NegativeEntry { s, i })
    }
}

/// `dim I(s,i) = Φ^{s} · dim I(i)`, where `dim I(i)` is row `i` of `C`.
pub fn preinj_dim(q: &Quiver, s: i64, i: usize) -> Result<DimVector, RootError> {
    let inj = cartan_matrix(q).row(i).to_vec();
    let v = DimVector(coxeter_apply(q, &inj, s)?);
    if v.is_nonnegative() {
        Ok(v)
    } else {
        Err(RootError::NegativeEntry { s, i })
    }
}

/// Argument order for the orthogonality condition of a Schofield pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SchofieldOrder {
    /// `⟨y,x⟩ = 0` and `⟨x,y⟩ = −1` with `y` the sub and `x` the quotient.
    #[default]
    SubFirst,
    /// `⟨x,y⟩ = 0`, the order as printed in the source statement.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SchofieldClause {
    Sum,
    QuotientNotExceptional,
    SubNotExceptional,
    MiddleNotExceptional,
    Orthogonality,
    ExtPairing,
}

impl SchofieldClause {
    pub fn describe(self) -> &'static str {
        match self {
            SchofieldClause::Sum => "dim X + dim Y differs from dim Z",
            SchofieldClause::QuotientNotExceptional => "quotient dimension is not an exceptional root",
            SchofieldClause::SubNotExceptional => "sub dimension is not an exceptional root",
            SchofieldClause::MiddleNotExceptional => "middle dimension is not an exceptional root",
            SchofieldClause::Orthogonality => "orthogonality of the Euler form fails",
            SchofieldClause::ExtPairing => "Euler pairing of quotient with sub is not -1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchofieldReport {
    pub failed: Vec<SchofieldClause>,
    /// `⟨y,x⟩` and `⟨x,y⟩`.
    pub sub_quot: PolyN,
    pub quot_sub: PolyN,
}

impl SchofieldReport {
    pub fn ok(&self) -> bool {
        self.failed.is_empty()
    }
}

pub fn schofield_pair_check(
    q: &Quiver,
    x_quot: &[i64],
    y_sub: &[i64],
    z: &[i64],
    order: SchofieldOrder,
) -> SchofieldReport {
    let c = |v: &[i64]| v.iter().map(|&b| DimExpr::constant(b)).collect::<Vec<_>>();
    schofield_pair_check_sym(q, &c(x_quot), &c(y_sub), &c(z), order, 0)
}

// ---- symbolic versions -------------------------------------------------

/// Euler form of two vectors of affine expressions, as a polynomial in `n`.
pub fn euler_form_sym(q: &Quiver, x: &[DimExpr], y: &[DimExpr]) -> PolyN {
    assert_eq!(x.len(), q.n_vertices());
    assert_eq!(y.len(), q.n_vertices());
    let p = |d: DimExpr| PolyN::from(d);
    let mut acc = PolyN::ZERO;
    for (a, b) in x.iter().zip(y) {
        acc = acc + p(*a).checked_mul(p(*b)).expect("affine");
    }
    for a in q.arrows() {
        acc = acc - p(x[a.source]).checked_mul(p(y[a.target])).expect("affine");
    }
    acc
}

pub fn tits_form_sym(q: &Quiver, x: &[DimExpr]) -> PolyN {
    euler_form_sym(q, x, x)
}

pub fn constant_vector(x: &[i64]) -> Vec<DimExpr> {
    x.iter().map(|&b| DimExpr::constant(b)).collect()
}

pub fn eval_vector(x: &[DimExpr], n: i64) -> DimVector {
    DimVector(x.iter().map(|d| d.eval(n)).collect())
}

/// Non-negative for all `n >= n0` and nonzero at `n0` (hence everywhere).
pub fn positive_from(x: &[DimExpr], n0: i64) -> bool {
    x.iter().all(|d| d.nonneg_from(n0)) && x.iter().map(|d| d.eval(n0)).sum::<i64>() > 0
}

/// An affine polynomial that never vanishes for `n >= n0`: its sign.
fn constant_sign_from(p: PolyN, n0: i64) -> Option<i64> {
    if p.c2 != 0 {
        return None;
    }
    let at = p.eval(n0);
    match (p.c1.signum(), at.signum()) {
        (_, 0) => None,
        (0, s) => Some(s),
        (a, s) if a == s => Some(s),
        _ => None,
    }
}

/// True when `x(n)` is an exceptional root for every `n >= n0`.
pub fn is_exceptional_root_sym(q: &Quiver, x: &[DimExpr], n0: i64) -> bool {
    if x.len() != q.n_vertices() || !positive_from(x, n0) {
        return false;
    }
    if tits_form_sym(q, x) != PolyN::constant(1) {
        return false;
    }
    match quiver_kind(q) {
        QuiverKind::Dynkin => true,
        QuiverKind::Tame => {
            let delta = constant_vector(&radical_delta(q).expect("tame"));
            let d = euler_form_sym(q, &delta, x);
            if d.is_zero() {
                // below δ for all n forces x to be constant
                x.iter().all(|e| e.is_constant()) && is_exceptional_root(q, &eval_vector(x, n0))
            } else {
                constant_sign_from(d, n0).is_some()
            }
        }
        QuiverKind::Other => false,
    }
}

/// Defect class of a family that is a positive root for all `n >= n0`, with
/// its defect polynomial. Fails if the class changes with `n`.
pub fn classify_dim_sym(q: &Quiver, x: &[DimExpr], n0: i64) -> Result<(DimClass, PolyN), RootError> {
    let delta = constant_vector(&radical_delta(q)?);
    if !is_exceptional_root_sym(q, x, n0) {
        return Err(RootError::NotPositiveRoot(eval_vector(x, n0)));
    }
    let d = euler_form_sym(q, &delta, x);
    let class = if d.is_zero() {
        DimClass::Regular
    } else {
        match constant_sign_from(d, n0) {
            Some(s) => DimClass::from_defect(s),
            None => return Err(RootError::NotPositiveRoot(eval_vector(x, n0))),
        }
    };
    Ok((class, d))
}

/// Symbolic Schofield test valid for all `n >= n0`.
pub fn schofield_pair_check_sym(
    q: &Quiver,
    x_quot: &[DimExpr],
    y_sub: &[DimExpr],
    z: &[DimExpr],
    order: SchofieldOrder,
    n0: i64,
) -> SchofieldReport {
    let mut failed = Vec::new();
    let n = q.n_vertices();
    if x_quot.len() != n || y_sub.len() != n || z.len() != n {
        return SchofieldReport { failed: vec![SchofieldClause::Sum], ..Default::default() };
    }
    if x_quot.iter().zip(y_sub).zip(z).any(|((a, b), c)| *a + *b != *c) {
        failed.push(SchofieldClause::Sum);
    }
    if !is_exceptional_root_sym(q, x_quot, n0) {
        failed.push(SchofieldClause::QuotientNotExceptional);
    }
    if !is_exceptional_root_sym(q, y_sub, n0) {
        failed.push(SchofieldClause::SubNotExceptional);
    }
    if !is_exceptional_root_sym(q, z, n0) {
        failed.push(SchofieldClause::MiddleNotExceptional);
    }
    let sub_quot = euler_form_sym(q, y_sub, x_quot);
    let quot_sub = euler_form_sym(q, x_quot, y_sub);
    match order {
        SchofieldOrder::SubFirst => {
            if !sub_quot.is_zero() {
                failed.push(SchofieldClause::Orthogonality);
            }
            if quot_sub != PolyN::constant(-1) {
                failed.push(SchofieldClause::ExtPairing);
            }
        }
        SchofieldOrder::Literal => {
            if !quot_sub.is_zero() {
                failed.push(SchofieldClause::Orthogonality);
            }
        }
    }
    SchofieldReport { failed, sub_quot, quot_sub }
}
