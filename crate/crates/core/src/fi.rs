//! Matrices over `{-1, 0, 1}` with closure-checked arithmetic and an
//! echelonization that only uses `±1` pivots and multipliers.
//!
//! A certified operation log never leaves the alphabet, so it maps verbatim
//! through `ℤ -> k` for every field `k` and the rank it certifies holds over
//! every field.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriVal {
    MinusOne,
    Zero,
    One,
}

impl TriVal {
    pub fn value(self) -> i8 {
        match self {
            TriVal::MinusOne => -1,
            TriVal::Zero => 0,
            TriVal::One => 1,
        }
    }

    pub fn from_int(v: i64) -> Option<TriVal> {
        match v {
            -1 => Some(TriVal::MinusOne),
            0 => Some(TriVal::Zero),
            1 => Some(TriVal::One),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("entry ({row},{col}) would be {value}, outside {{-1,0,1}}")]
    ClosureViolation { row: usize, col: usize, value: i64 },
    #[error("cannot certify rank field-independently ({reason}); {diagnostic}")]
    CannotCertify { reason: CertifyFailure, diagnostic: RankDiagnostic },
    #[error("rank {rank} is below the required {needed}")]
    NotFullRank { rank: usize, needed: usize },
    #[error("replay diverges at operation {0}")]
    ReplayMismatch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CertifyFailure {
    /// Every admissible operation sequence was tried.
    SearchExhausted,
    /// The node budget ran out first.
    BudgetExhausted,
}

impl fmt::Display for CertifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertifyFailure::SearchExhausted => "no admissible elimination exists",
            CertifyFailure::BudgetExhausted => "search budget exhausted",
        })
    }
}

/// Ranks over a few fields, reported alongside a refusal. Never used to
/// certify anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankDiagnostic {
    pub gf2: usize,
    pub gf3: usize,
    pub gf5: usize,
    pub rational: usize,
}

impl RankDiagnostic {
    pub fn field_dependent(&self) -> bool {
        !(self.gf2 == self.rational && self.gf3 == self.rational && self.gf5 == self.rational)
    }
}

impl fmt::Display for RankDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} over Q, rank {} over GF(2), rank {} over GF(3), rank {} over GF(5)",
            self.rational, self.gf2, self.gf3, self.gf5
        )
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FiMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

impl fmt::Debug for FiMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiMatrix{}x{}{:?}", self.rows, self.cols, self.to_rows())
    }
}

impl FiMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        FiMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Ones on the secondary diagonal.
    pub fn exchange(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + (n - 1 - i)] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows; `cols` is needed for `0 x cols`.
    pub fn from_rows(rows: &[Vec<i64>], cols: usize) -> Result<Self, FiError> {
        let mut m = Self::zero(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(FiError::ShapeMismatch(alloc::format!("row {i} has length {}", r.len())));
            }
            for (j, &v) in r.iter().enumerate() {
                if TriVal::from_int(v).is_none() {
                    return Err(FiError::ClosureViolation { row: i, col: j, value: v });
                }
                m.data[i * cols + j] = v as i8;
            }
        }
        Ok(m)
    }

    /// Convenience for literals with at least one row.
    pub fn from_slices(rows: &[&[i64]]) -> Result<Self, FiError> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TriVal) {
        self.data[i * self.cols + j] = v.value();
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|&v| i64::from(v)).collect()).collect()
    }

    pub fn entries(&self) -> &[i8] {
        &self.data
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        FiMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| -v).collect() }
    }

    /// Writes `block` with its top left corner at `(r0, c0)`.
    pub fn place(&mut self, r0: usize, c0: usize, block: &FiMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j);
            }
        }
    }

    /// FNV-1a over shape and entries, used to tie logged operations to
    /// snapshots.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |b: u8| {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for b in (self.rows as u64).to_le_bytes().into_iter().chain((self.cols as u64).to_le_bytes()) {
            eat(b);
        }
        for &v in &self.data {
            eat(v as u8);
        }
        h
    }
}

fn same_shape(a: &FiMatrix, b: &FiMatrix) -> Result<(), FiError> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(FiError::ShapeMismatch(alloc::format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )))
    }
}

fn entrywise(a: &FiMatrix, b: &FiMatrix, f: impl Fn(i64, i64) -> i64) -> Result<FiMatrix, FiError> {
    same_shape(a, b)?;
    let mut out = FiMatrix::zero(a.rows, a.cols);
    for (k, (x, y)) in a.data.iter().zip(&b.data).enumerate() {
        let v = f(i64::from(*x), i64::from(*y));
        if !(-1..=1).contains(&v) {
            return Err(FiError::ClosureViolation { row: k / a.cols, col: k % a.cols, value: v });
        }
        out.data[k] = v as i8;
    }
    Ok(out)
}

pub fn fi_add(a: &FiMatrix, b: &FiMatrix) -> Result<FiMatrix, FiError> {
    entrywise(a, b, |x, y| x + y)
}

pub fn fi_sub(a: &FiMatrix, b: &FiMatrix) -> Result<FiMatrix, FiError> {
    entrywise(a, b, |x, y| x - y)
}

/// Integer product. Partial sums may leave the range; only the final entry
/// is checked, since that entry is what `ℤ -> k` sends to the field.
pub fn fi_mul(a: &FiMatrix, b: &FiMatrix) -> Result<FiMatrix, FiError> {
    let p = int_mul(a, b)?;
    let mut out = FiMatrix::zero(a.rows, b.cols);
    for (k, v) in p.into_iter().enumerate() {
        if !(-1..=1).contains(&v) {
            return Err(FiError::ClosureViolation { row: k / b.cols, col: k % b.cols, value: v });
        }
        out.data[k] = v as i8;
    }
    Ok(out)
}

/// Integer product without the range check, row-major.
pub fn int_mul(a: &FiMatrix, b: &FiMatrix) -> Result<Vec<i64>, FiError> {
    if a.cols != b.rows {
        return Err(FiError::ShapeMismatch(alloc::format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = vec![0i64; a.rows * b.cols];
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = i64::from(a.get(i, k));
            if x == 0 {
                continue;
            }
            for j in 0..b.cols {
                out[i * b.cols + j] += x * i64::from(b.get(k, j));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "op", rename_all = "kebab-case"))]
pub enum OpKind {
    SwapRows { i: usize, j: usize },
    SwapCols { i: usize, j: usize },
    /// `row[target] += sign · row[source]`.
    AddRow { target: usize, source: usize, sign: i8 },
    /// `col[target] += sign · col[source]`.
    AddCol { target: usize, source: usize, sign: i8 },
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pm = |s: i8| if s < 0 { '-' } else { '+' };
        match *self {
            OpKind::SwapRows { i, j } => write!(f, "r{} <-> r{}", i + 1, j + 1),
            OpKind::SwapCols { i, j } => write!(f, "c{} <-> c{}", i + 1, j + 1),
            OpKind::AddRow { target, source, sign } => {
                write!(f, "r{} <- r{} {} r{}", target + 1, target + 1, pm(sign), source + 1)
            }
            OpKind::AddCol { target, source, sign } => {
                write!(f, "c{} <- c{} {} c{}", target + 1, target + 1, pm(sign), source + 1)
            }
        }
    }
}

/// One logged operation with the fingerprint of the matrix it produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElementaryOp {
    pub kind: OpKind,
    pub hash: u64,
}

/// Applies one operation in place, refusing anything that leaves the
/// alphabet. On error the matrix is unchanged.
pub fn apply_op(m: &mut FiMatrix, op: OpKind) -> Result<(), FiError> {
    let (r, c) = m.shape();
    let bad = |what: &str| FiError::ShapeMismatch(alloc::format!("{what} index out of range"));
    match op {
        OpKind::SwapRows { i, j } => {
            if i >= r || j >= r {
                return Err(bad("row"));
            }
            for k in 0..c {
                m.data.swap(i * c + k, j * c + k);
            }
        }
        OpKind::SwapCols { i, j } => {
            if i >= c || j >= c {
                return Err(bad("column"));
            }
            for k in 0..r {
                m.data.swap(k * c + i, k * c + j);
            }
        }
        OpKind::AddRow { target, source, sign } => {
            if target >= r || source >= r || target == source || sign.abs() != 1 {
                return Err(bad("row"));
            }
            for k in 0..c {
                let v = i64::from(m.get(target, k)) + i64::from(sign) * i64::from(m.get(source, k));
                if !(-1..=1).contains(&v) {
                    return Err(FiError::ClosureViolation { row: target, col: k, value: v });
                }
            }
            for k in 0..c {
                m.data[target * c + k] += sign * m.data[source * c + k];
            }
        }
        OpKind::AddCol { target, source, sign } => {
            if target >= c || source >= c || target == source || sign.abs() != 1 {
                return Err(bad("column"));
            }
            for k in 0..r {
                let v = i64::from(m.get(k, target)) + i64::from(sign) * i64::from(m.get(k, source));
                if !(-1..=1).contains(&v) {
                    return Err(FiError::ClosureViolation { row: k, col: target, value: v });
                }
            }
            for k in 0..r {
                m.data[k * c + target] += sign * m.data[k * c + source];
            }
        }
    }
    Ok(())
}

/// A rank certified over every field.
///
/// The final form has pivots `±1` at `(k,k)` for `k < rank`, zeros below
/// each pivot and zero rows from `rank` on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankCertificate {
    pub rank: usize,
    pub ops: Vec<ElementaryOp>,
    pub echelon: FiMatrix,
}

impl RankCertificate {
    pub fn corank(&self) -> usize {
        self.echelon.cols - self.rank
    }
}

struct Search {
    budget: u64,
    nodes: u64,
    out_of_budget: bool,
}

#[derive(Clone, Copy)]
enum Mode {
    /// Clear below the pivot with row operations.
    Rows,
    /// Clear right of the pivot with column operations, then below it.
    Cols,
}

fn push(m: &mut FiMatrix, ops: &mut Vec<ElementaryOp>, kind: OpKind) -> Result<(), FiError> {
    apply_op(m, kind)?;
    ops.push(ElementaryOp { kind, hash: m.fingerprint() });
    Ok(())
}

fn pivot_step(m: &mut FiMatrix, ops: &mut Vec<ElementaryOp>, k: usize, r: usize, c: usize, mode: Mode) -> Result<(), FiError> {
    if r != k {
        push(m, ops, OpKind::SwapRows { i: k, j: r })?;
    }
    if c != k {
        push(m, ops, OpKind::SwapCols { i: k, j: c })?;
    }
    let p = m.get(k, k);
    if let Mode::Cols = mode {
        for j in k + 1..m.cols {
            let x = m.get(k, j);
            if x != 0 {
                push(m, ops, OpKind::AddCol { target: j, source: k, sign: -x * p })?;
            }
        }
    }
    for i in k + 1..m.rows {
        let x = m.get(i, k);
        if x != 0 {
            push(m, ops, OpKind::AddRow { target: i, source: k, sign: -x * p })?;
        }
    }
    Ok(())
}

fn dfs(m: &FiMatrix, k: usize, ops: &mut Vec<ElementaryOp>, s: &mut Search) -> Option<(usize, FiMatrix)> {
    let (rows, cols) = m.shape();
    let active_nnz = |i: usize| (k..cols).filter(|&j| m.get(i, j) != 0).count();
    let mut any = false;
    for c in k..cols {
        let mut cands: Vec<usize> = (k..rows).filter(|&r| m.get(r, c) != 0).collect();
        if cands.is_empty() {
            continue;
        }
        any = true;
        cands.sort_by_key(|&r| (active_nnz(r), r));
        for r in cands {
            for mode in [Mode::Rows, Mode::Cols] {
                if s.nodes >= s.budget {
                    s.out_of_budget = true;
                    return None;
                }
                s.nodes += 1;
                let mut w = m.clone();
                let mark = ops.len();
                if pivot_step(&mut w, ops, k, r, c, mode).is_ok() {
                    if let Some(done) = dfs(&w, k + 1, ops, s) {
                        return Some(done);
                    }
                    if s.out_of_budget {
                        return None;
                    }
                }
                ops.truncate(mark);
            }
        }
    }
    if any {
        None
    } else {
        Some((k, m.clone()))
    }
}

pub fn fi_echelonize(a: &FiMatrix) -> Result<RankCertificate, FiError> {
    fi_echelonize_with(a, crate::DEFAULT_BACKTRACK_LIMIT)
}

/// Depth-first search over pivot choices (columns left to right, sparsest
/// rows first, row clearing before column clearing) with a node budget.
pub fn fi_echelonize_with(a: &FiMatrix, budget: u64) -> Result<RankCertificate, FiError> {
    let mut s = Search { budget, nodes: 0, out_of_budget: false };
    let mut ops = Vec::new();
    match dfs(a, 0, &mut ops, &mut s) {
        Some((rank, echelon)) => Ok(RankCertificate { rank, ops, echelon }),
        None => Err(FiError::CannotCertify {
            reason: if s.out_of_budget { CertifyFailure::BudgetExhausted } else { CertifyFailure::SearchExhausted },
            diagnostic: diagnose(a),
        }),
    }
}

pub fn fi_corank(a: &FiMatrix, budget: u64) -> Result<usize, FiError> {
    fi_echelonize_with(a, budget).map(|c| c.corank())
}

pub fn fi_full_rank_check(a: &FiMatrix, side: Side, budget: u64) -> Result<RankCertificate, FiError> {
    let cert = fi_echelonize_with(a, budget)?;
    let needed = match side {
        Side::Column => a.cols,
        Side::Row => a.rows,
    };
    if cert.rank == needed {
        Ok(cert)
    } else {
        Err(FiError::NotFullRank { rank: cert.rank, needed })
    }
}

/// Replays a log over the integers, checking range and fingerprints.
pub fn replay(input: &FiMatrix, ops: &[ElementaryOp]) -> Result<FiMatrix, FiError> {
    let mut m = input.clone();
    for (k, op) in ops.iter().enumerate() {
        apply_op(&mut m, op.kind).map_err(|_| FiError::ReplayMismatch(k))?;
        if m.fingerprint() != op.hash {
            return Err(FiError::ReplayMismatch(k));
        }
    }
    Ok(m)
}

/// Rank over `GF(p)` for a prime `p`.
pub fn rank_mod_p(a: &FiMatrix, p: u64) -> usize {
    let (rows, cols) = a.shape();
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|i| a.row(i).iter().map(|&v| (i64::from(v).rem_euclid(p as i64)) as u64).collect())
        .collect();
    let inv = |x: u64| -> u64 {
        let (mut r, mut b, mut e) = (1u64, x % p, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let f = inv(m[rank][c]);
        for j in 0..cols {
            m[rank][j] = m[rank][j] * f % p;
        }
        for i in 0..rows {
            if i != rank && m[i][c] != 0 {
                let g = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p * p - g * m[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over `ℚ` by fraction-free elimination on big integers.
pub fn rank_rational(a: &FiMatrix) -> usize {
    let (rows, cols) = a.shape();
    let mut m: Vec<Vec<BigInt>> =
        (0..rows).map(|i| a.row(i).iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&m[i][j] * &m[rank][c] - &m[i][c] * &m[rank][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].abs();
        rank += 1;
    }
    rank
}

pub fn diagnose(a: &FiMatrix) -> RankDiagnostic {
    RankDiagnostic {
        gf2: rank_mod_p(a, 2),
        gf3: rank_mod_p(a, 3),
        gf5: rank_mod_p(a, 5),
        rational: rank_rational(a),
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        entries: Vec<Vec<i64>>,
    }

    impl Serialize for FiMatrix {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            Repr { rows: self.rows, cols: self.cols, entries: self.to_rows() }.serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for FiMatrix {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            if r.entries.len() != r.rows {
                return Err(D::Error::custom("row count mismatch"));
            }
            FiMatrix::from_rows(&r.entries, r.cols).map_err(D::Error::custom)
        }
    }

    impl Serialize for RankCertificate {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            use serde::ser::SerializeStruct;
            let mut st = s.serialize_struct("RankCertificate", 3)?;
            st.serialize_field("rank", &self.rank)?;
            st.serialize_field("ops", &self.ops)?;
            st.serialize_field("echelon", &self.echelon)?;
            st.end()
        }
    }

    impl<'de> Deserialize<'de> for RankCertificate {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            #[derive(Deserialize)]
            struct C {
                rank: usize,
                ops: Vec<ElementaryOp>,
                echelon: FiMatrix,
            }
            let c = C::deserialize(d)?;
            Ok(RankCertificate { rank: c.rank, ops: c.ops, echelon: c.echelon })
        }
    }
}
