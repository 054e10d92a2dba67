//! Block matrices of variable size built from `Z`, `±I` and `±E` blocks,
//! where `E` has ones on the secondary diagonal.
//!
//! Arithmetic happens in [`ComboMatrix`], whose cells are formal sums
//! `cI·I + cE·E` reduced with `E² = I`. A [`BlockMatrix`] is what may be
//! stored: every cell a single signed symbol. Partitions that describe the
//! same total size differently can be brought to a common refinement,
//! splitting `I` blocks along the diagonal and `E` blocks along the
//! anti-diagonal.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::expr::{DimExpr, PolyN};
use crate::fi::FiMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sym {
    #[cfg_attr(feature = "serde", serde(rename = "Z"))]
    Zero,
    I,
    E,
}

/// A stored cell: `Zero`, `±I` or `±E`. `Zero` always carries sign `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub sym: Sym,
    pub sign: i8,
}

impl Block {
    pub const ZERO: Block = Block { sym: Sym::Zero, sign: 1 };
    pub const I: Block = Block { sym: Sym::I, sign: 1 };
    pub const NEG_I: Block = Block { sym: Sym::I, sign: -1 };
    pub const E: Block = Block { sym: Sym::E, sign: 1 };
    pub const NEG_E: Block = Block { sym: Sym::E, sign: -1 };

    pub fn is_zero(self) -> bool {
        self.sym == Sym::Zero
    }

    pub fn combo(self) -> Combo {
        let s = i64::from(self.sign);
        match self.sym {
            Sym::Zero => Combo::ZERO,
            Sym::I => Combo { ci: s, ce: 0 },
            Sym::E => Combo { ci: 0, ce: s },
        }
    }

    pub fn neg(self) -> Block {
        match self.sym {
            Sym::Zero => self,
            _ => Block { sym: self.sym, sign: -self.sign },
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.sym, self.sign) {
            (Sym::Zero, _) => f.write_str("Z"),
            (Sym::I, s) => f.write_str(if s < 0 { "-I" } else { "I" }),
            (Sym::E, s) => f.write_str(if s < 0 { "-E" } else { "E" }),
        }
    }
}

/// Transient cell `ci·I + ce·E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Combo {
    pub ci: i64,
    pub ce: i64,
}

impl Combo {
    pub const ZERO: Combo = Combo { ci: 0, ce: 0 };

    pub fn is_zero(self) -> bool {
        self.ci == 0 && self.ce == 0
    }

    pub fn add(self, o: Combo) -> Combo {
        Combo { ci: self.ci + o.ci, ce: self.ce + o.ce }
    }

    pub fn sub(self, o: Combo) -> Combo {
        Combo { ci: self.ci - o.ci, ce: self.ce - o.ce }
    }

    pub fn neg(self) -> Combo {
        Combo { ci: -self.ci, ce: -self.ce }
    }

    /// Product in the algebra with `I·E = E·I = E` and `E·E = I`.
    pub fn mul(self, o: Combo) -> Combo {
        Combo { ci: self.ci * o.ci + self.ce * o.ce, ce: self.ci * o.ce + self.ce * o.ci }
    }

    /// At size 0 everything vanishes and at size 1 `E = I`.
    pub fn normalize(self, size: DimExpr) -> Combo {
        match (size.is_constant(), size.b) {
            (true, 0) => Combo::ZERO,
            (true, 1) => Combo { ci: self.ci + self.ce, ce: 0 },
            _ => self,
        }
    }

    pub fn to_block(self) -> Option<Block> {
        match (self.ci, self.ce) {
            (0, 0) => Some(Block::ZERO),
            (s @ (1 | -1), 0) => Some(Block { sym: Sym::I, sign: s as i8 }),
            (0, s @ (1 | -1)) => Some(Block { sym: Sym::E, sign: s as i8 }),
            _ => None,
        }
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |f: &mut fmt::Formatter<'_>, c: i64, s: &str, first: bool| -> fmt::Result {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            if c.abs() == 1 {
                write!(f, "{sign}{s}")
            } else {
                write!(f, "{sign}{}{s}", c.abs())
            }
        };
        match (self.ci, self.ce) {
            (0, 0) => f.write_str("Z"),
            (i, 0) => term(f, i, "I", true),
            (0, e) => term(f, e, "E", true),
            (i, e) => {
                term(f, i, "I", true)?;
                term(f, e, "E", false)
            }
        }
    }
}

/// Product of two cells, with a flag telling whether `E·E = I` was used.
pub fn block_entry_mul(x: Block, y: Block) -> (Combo, bool) {
    let rewrite = x.sym == Sym::E && y.sym == Sym::E;
    (x.combo().mul(y.combo()), rewrite)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),
    #[error("cell ({row},{col}) reduces to {combo}, which is not a single signed block")]
    ClosureViolation { row: usize, col: usize, combo: Combo },
    #[error("cell ({row},{col}) holds I or E but its row size {rows} differs from its column size {cols}")]
    NonSquareSymbol { row: usize, col: usize, rows: DimExpr, cols: DimExpr },
    #[error("block size {expr} is negative at n = {n}")]
    NegativeSize { expr: DimExpr, n: i64 },
    #[error("cell ({row},{col}) has a negative sign")]
    NegativeBlock { row: usize, col: usize },
    #[error("grid has {got} cells, expected {expected}")]
    GridShape { expected: usize, got: usize },
    #[error("cut points {0} and {1} are not ordered for all n in range")]
    Incomparable(DimExpr, DimExpr),
    #[error("cannot split cell ({row},{col}) along the common refinement")]
    Misaligned { row: usize, col: usize },
    #[error("partition refinement does not stabilize")]
    RefinementDiverged,
}

/// A stored block matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockMatrix {
    rows: Vec<DimExpr>,
    cols: Vec<DimExpr>,
    grid: Vec<Block>,
}

impl BlockMatrix {
    pub fn new(rows: Vec<DimExpr>, cols: Vec<DimExpr>, grid: Vec<Block>) -> Result<Self, BlockError> {
        if grid.len() != rows.len() * cols.len() {
            return Err(BlockError::GridShape { expected: rows.len() * cols.len(), got: grid.len() });
        }
        let w = cols.len();
        for (k, b) in grid.iter().enumerate() {
            let (i, j) = (k / w, k % w);
            if b.sym == Sym::Zero && b.sign != 1 {
                return Err(BlockError::ClosureViolation { row: i, col: j, combo: Combo::ZERO });
            }
            if b.sign.abs() != 1 {
                return Err(BlockError::ClosureViolation { row: i, col: j, combo: b.combo() });
            }
            if !b.is_zero() && rows[i] != cols[j] {
                return Err(BlockError::NonSquareSymbol { row: i, col: j, rows: rows[i], cols: cols[j] });
            }
        }
        Ok(BlockMatrix { rows, cols, grid })
    }

    pub fn zero(rows: Vec<DimExpr>, cols: Vec<DimExpr>) -> Self {
        let grid = vec![Block::ZERO; rows.len() * cols.len()];
        BlockMatrix { rows, cols, grid }
    }

    /// Unlisted cells are `Zero`.
    pub fn from_cells(
        rows: Vec<DimExpr>,
        cols: Vec<DimExpr>,
        cells: &[(usize, usize, Block)],
    ) -> Result<Self, BlockError> {
        let mut grid = vec![Block::ZERO; rows.len() * cols.len()];
        for &(i, j, b) in cells {
            if i >= rows.len() || j >= cols.len() {
                return Err(BlockError::GridShape { expected: rows.len() * cols.len(), got: i * cols.len() + j });
            }
            grid[i * cols.len() + j] = b;
        }
        Self::new(rows, cols, grid)
    }

    /// Single block `b` of size `d`.
    pub fn single(d: DimExpr, b: Block) -> Self {
        Self::new(vec![d], vec![d], vec![b]).expect("square")
    }

    /// Each entry becomes a `1 x 1` block.
    pub fn from_fi(m: &FiMatrix) -> Self {
        let rows = vec![DimExpr::ONE; m.rows()];
        let cols = vec![DimExpr::ONE; m.cols()];
        let grid = m
            .entries()
            .iter()
            .map(|&v| match v {
                1 => Block::I,
                -1 => Block::NEG_I,
                _ => Block::ZERO,
            })
            .collect();
        BlockMatrix { rows, cols, grid }
    }

    pub fn row_partition(&self) -> &[DimExpr] {
        &self.rows
    }

    pub fn col_partition(&self) -> &[DimExpr] {
        &self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Block {
        self.grid[i * self.cols.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, b: Block) -> Result<(), BlockError> {
        if !b.is_zero() && self.rows[i] != self.cols[j] {
            return Err(BlockError::NonSquareSymbol { row: i, col: j, rows: self.rows[i], cols: self.cols[j] });
        }
        let w = self.cols.len();
        self.grid[i * w + j] = b;
        Ok(())
    }

    pub fn grid(&self) -> &[Block] {
        &self.grid
    }

    pub fn total_rows(&self) -> DimExpr {
        self.rows.iter().copied().sum()
    }

    pub fn total_cols(&self) -> DimExpr {
        self.cols.iter().copied().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.rows.iter().chain(&self.cols).all(|d| d.is_constant())
    }

    pub fn has_negative(&self) -> bool {
        self.grid.iter().any(|b| !b.is_zero() && b.sign < 0)
    }

    pub fn map_sizes(&self, f: impl Fn(DimExpr) -> DimExpr) -> Self {
        BlockMatrix {
            rows: self.rows.iter().map(|&d| f(d)).collect(),
            cols: self.cols.iter().map(|&d| f(d)).collect(),
            grid: self.grid.clone(),
        }
    }

    pub fn shift(&self, c: i64) -> Self {
        self.map_sizes(|d| d.shift(c))
    }

    pub fn fix(&self, k: i64) -> Self {
        self.map_sizes(|d| d.fix(k))
    }

    pub fn transpose(&self) -> Self {
        let (h, w) = (self.rows.len(), self.cols.len());
        let mut grid = vec![Block::ZERO; h * w];
        for i in 0..h {
            for j in 0..w {
                grid[j * h + i] = self.get(i, j);
            }
        }
        BlockMatrix { rows: self.cols.clone(), cols: self.rows.clone(), grid }
    }

    pub fn neg(&self) -> Self {
        BlockMatrix { rows: self.rows.clone(), cols: self.cols.clone(), grid: self.grid.iter().map(|b| b.neg()).collect() }
    }

    pub fn to_combo(&self) -> ComboMatrix {
        ComboMatrix {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            grid: self.grid.iter().map(|b| b.combo()).collect(),
        }
    }

    /// Number of ones as a polynomial in `n`; only for matrices without
    /// negative blocks.
    pub fn ones_count_sym(&self) -> Result<PolyN, BlockError> {
        ones_count_sym(self)
    }
}

fn sizes_at(parts: &[DimExpr], n: i64) -> Result<Vec<usize>, BlockError> {
    parts
        .iter()
        .map(|&d| {
            let v = d.eval(n);
            usize::try_from(v).map_err(|_| BlockError::NegativeSize { expr: d, n })
        })
        .collect()
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    out.push(0);
    for s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

/// Concrete matrix at parameter `n`.
pub fn instantiate(a: &BlockMatrix, n: i64) -> Result<FiMatrix, BlockError> {
    let rs = sizes_at(&a.rows, n)?;
    let cs = sizes_at(&a.cols, n)?;
    let (ro, co) = (offsets(&rs), offsets(&cs));
    let mut m = FiMatrix::zero(ro[rs.len()], co[cs.len()]);
    for i in 0..rs.len() {
        for j in 0..cs.len() {
            let b = a.get(i, j);
            let block = match b.sym {
                Sym::Zero => continue,
                Sym::I => FiMatrix::identity(rs[i]),
                Sym::E => FiMatrix::exchange(rs[i]),
            };
            let block = if b.sign < 0 { block.neg() } else { block };
            m.place(ro[i], co[j], &block);
        }
    }
    Ok(m)
}

pub fn ones_count_sym(a: &BlockMatrix) -> Result<PolyN, BlockError> {
    let w = a.cols.len();
    let mut total = DimExpr::ZERO;
    for (k, b) in a.grid.iter().enumerate() {
        if b.is_zero() {
            continue;
        }
        if b.sign < 0 {
            return Err(BlockError::NegativeBlock { row: k / w, col: k % w });
        }
        total = total + a.rows[k / w];
    }
    Ok(PolyN::from(total))
}

/// A block matrix whose cells are arbitrary integer combinations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComboMatrix {
    pub rows: Vec<DimExpr>,
    pub cols: Vec<DimExpr>,
    pub grid: Vec<Combo>,
}

impl ComboMatrix {
    pub fn get(&self, i: usize, j: usize) -> Combo {
        self.grid[i * self.cols.len() + j]
    }

    pub fn total_rows(&self) -> DimExpr {
        self.rows.iter().copied().sum()
    }

    pub fn total_cols(&self) -> DimExpr {
        self.cols.iter().copied().sum()
    }

    /// Cell values after the size 0 / size 1 identities.
    pub fn normalized(&self) -> ComboMatrix {
        let w = self.cols.len();
        let grid = self.grid.iter().enumerate().map(|(k, c)| c.normalize(self.rows[k / w])).collect();
        ComboMatrix { rows: self.rows.clone(), cols: self.cols.clone(), grid }
    }

    pub fn is_zero(&self) -> bool {
        self.normalized().grid.iter().all(|c| c.is_zero())
    }

    /// Closure check: every cell a single signed symbol.
    pub fn to_block(&self) -> Result<BlockMatrix, BlockError> {
        let n = self.normalized();
        let w = n.cols.len();
        let grid = n
            .grid
            .iter()
            .enumerate()
            .map(|(k, c)| c.to_block().ok_or(BlockError::ClosureViolation { row: k / w, col: k % w, combo: *c }))
            .collect::<Result<Vec<_>, _>>()?;
        BlockMatrix::new(n.rows, n.cols, grid)
    }

    pub fn sub(&self, o: &ComboMatrix) -> Result<ComboMatrix, BlockError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(BlockError::PartitionMismatch("difference of differently partitioned matrices".into()));
        }
        let grid = self.grid.iter().zip(&o.grid).map(|(a, b)| a.sub(*b)).collect();
        Ok(ComboMatrix { rows: self.rows.clone(), cols: self.cols.clone(), grid })
    }

    pub fn add(&self, o: &ComboMatrix) -> Result<ComboMatrix, BlockError> {
        self.sub(&o.neg())
    }

    pub fn neg(&self) -> ComboMatrix {
        ComboMatrix { rows: self.rows.clone(), cols: self.cols.clone(), grid: self.grid.iter().map(|c| c.neg()).collect() }
    }

    /// Integer matrix at `n`, row-major with its shape.
    pub fn instantiate(&self, n: i64) -> Result<(usize, usize, Vec<i64>), BlockError> {
        let rs = sizes_at(&self.rows, n)?;
        let cs = sizes_at(&self.cols, n)?;
        let (ro, co) = (offsets(&rs), offsets(&cs));
        let (h, w) = (ro[rs.len()], co[cs.len()]);
        let mut out = vec![0i64; h * w];
        for i in 0..rs.len() {
            for j in 0..cs.len() {
                let c = self.get(i, j);
                if c.is_zero() {
                    continue;
                }
                let d = rs[i];
                for t in 0..d {
                    out[(ro[i] + t) * w + co[j] + t] += c.ci;
                    out[(ro[i] + t) * w + co[j] + d - 1 - t] += c.ce;
                }
            }
        }
        Ok((h, w, out))
    }
}

/// One summand `a[i,k]·b[k,j]` of a product cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Term {
    pub k: usize,
    pub left: Combo,
    pub right: Combo,
    pub value: Combo,
    /// `E·E` was rewritten to `I`.
    pub rewrite: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellDetail {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<Term>,
    pub result: Combo,
}

/// Term-by-term expansion of every cell that has a nonzero summand.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProductDetail {
    pub cells: Vec<CellDetail>,
}

/// Product with identical inner partitions; no closure check.
pub fn combo_mul(a: &ComboMatrix, b: &ComboMatrix) -> Result<(ComboMatrix, ProductDetail), BlockError> {
    if a.cols != b.rows {
        return Err(BlockError::PartitionMismatch(alloc::format!(
            "inner partitions {} and {} differ",
            fmt_parts(&a.cols),
            fmt_parts(&b.rows)
        )));
    }
    let (h, m, w) = (a.rows.len(), a.cols.len(), b.cols.len());
    let mut grid = vec![Combo::ZERO; h * w];
    let mut detail = ProductDetail::default();
    for i in 0..h {
        for j in 0..w {
            let mut terms = Vec::new();
            let mut acc = Combo::ZERO;
            for k in 0..m {
                let (x, y) = (a.get(i, k), b.get(k, j));
                if x.is_zero() || y.is_zero() {
                    continue;
                }
                let v = x.mul(y).normalize(a.cols[k]);
                acc = acc.add(v);
                terms.push(Term { k, left: x, right: y, value: v, rewrite: x.ce != 0 && y.ce != 0 });
            }
            let acc = acc.normalize(a.rows[i]);
            grid[i * w + j] = acc;
            if !terms.is_empty() {
                detail.cells.push(CellDetail { row: i, col: j, terms, result: acc });
            }
        }
    }
    Ok((ComboMatrix { rows: a.rows.clone(), cols: b.cols.clone(), grid }, detail))
}

/// Stored product; every cell must reduce to a single signed symbol.
pub fn bm_mul(a: &BlockMatrix, b: &BlockMatrix) -> Result<BlockMatrix, BlockError> {
    combo_mul(&a.to_combo(), &b.to_combo())?.0.to_block()
}

/// Equality over the integers (hence over every field) of two matrices with
/// identical partitions.
pub fn bm_equal_fi(a: &BlockMatrix, b: &BlockMatrix) -> Result<bool, BlockError> {
    Ok(a.to_combo().sub(&b.to_combo())?.is_zero())
}

pub fn fmt_parts(p: &[DimExpr]) -> String {
    let mut s = String::from("(");
    for (k, d) in p.iter().enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        s.push_str(&alloc::format!("{d}"));
    }
    s.push(')');
    s
}

// ---- refinement --------------------------------------------------------

const MAX_CUTS: usize = 4096;

fn boundaries(parts: &[DimExpr]) -> Vec<DimExpr> {
    let mut out = Vec::with_capacity(parts.len() + 1);
    let mut acc = DimExpr::ZERO;
    out.push(acc);
    for &p in parts {
        acc = acc + p;
        out.push(acc);
    }
    out
}

fn insert_cut(cuts: &mut Vec<DimExpr>, p: DimExpr, n0: i64) -> Result<bool, BlockError> {
    let mut pos = None;
    for (k, &c) in cuts.iter().enumerate() {
        match p.cmp_from(c, n0) {
            Some(Ordering::Equal) => return Ok(false),
            Some(Ordering::Less) => {
                if pos.is_none() {
                    pos = Some(k);
                }
            }
            Some(Ordering::Greater) => {
                if pos.is_some() {
                    return Err(BlockError::Incomparable(p, c));
                }
            }
            None => return Err(BlockError::Incomparable(p, c)),
        }
    }
    match pos {
        Some(k) if k > 0 => {
            cuts.insert(k, p);
            if cuts.len() > MAX_CUTS {
                return Err(BlockError::RefinementDiverged);
            }
            Ok(true)
        }
        _ => Err(BlockError::Incomparable(p, *cuts.last().unwrap_or(&DimExpr::ZERO))),
    }
}

fn merge_cuts(into: &mut Vec<DimExpr>, from: &[DimExpr], n0: i64) -> Result<bool, BlockError> {
    let mut changed = false;
    for &p in from {
        changed |= insert_cut(into, p, n0)?;
    }
    Ok(changed)
}

fn strictly_inside(p: DimExpr, lo: DimExpr, hi: DimExpr, n0: i64) -> bool {
    p.cmp_from(lo, n0) == Some(Ordering::Greater) && p.cmp_from(hi, n0) == Some(Ordering::Less)
}

/// Transports cuts through `I` and `E` cells between the row and column
/// cut sets of one matrix.
fn propagate(m: &ComboMatrix, rc: &mut Vec<DimExpr>, cc: &mut Vec<DimExpr>, n0: i64) -> Result<bool, BlockError> {
    let (rb, cb) = (boundaries(&m.rows), boundaries(&m.cols));
    let mut changed = false;
    for i in 0..m.rows.len() {
        for j in 0..m.cols.len() {
            let c = m.get(i, j);
            if c.is_zero() {
                continue;
            }
            let (r0, r1, c0, c1) = (rb[i], rb[i + 1], cb[j], cb[j + 1]);
            for p in rc.clone() {
                if strictly_inside(p, r0, r1, n0) {
                    let off = p - r0;
                    if c.ci != 0 {
                        changed |= insert_cut(cc, c0 + off, n0)?;
                    }
                    if c.ce != 0 {
                        changed |= insert_cut(cc, c1 - off, n0)?;
                    }
                }
            }
            for p in cc.clone() {
                if strictly_inside(p, c0, c1, n0) {
                    let off = p - c0;
                    if c.ci != 0 {
                        changed |= insert_cut(rc, r0 + off, n0)?;
                    }
                    if c.ce != 0 {
                        changed |= insert_cut(rc, r1 - off, n0)?;
                    }
                }
            }
        }
    }
    Ok(changed)
}

/// Rebuilds `m` on finer cut sets that contain its own boundaries.
fn rebuild(m: &ComboMatrix, rc: &[DimExpr], cc: &[DimExpr], n0: i64) -> Result<ComboMatrix, BlockError> {
    let (rb, cb) = (boundaries(&m.rows), boundaries(&m.cols));
    let row_owner = owners(&rb, rc)?;
    let col_owner = owners(&cb, cc)?;
    let rows: Vec<DimExpr> = rc.windows(2).map(|w| w[1] - w[0]).collect();
    let cols: Vec<DimExpr> = cc.windows(2).map(|w| w[1] - w[0]).collect();
    let mut grid = Vec::with_capacity(rows.len() * cols.len());
    for a in 0..rows.len() {
        let i = row_owner[a];
        for b in 0..cols.len() {
            let j = col_owner[b];
            let c = m.get(i, j);
            let mut out = Combo::ZERO;
            if !c.is_zero() {
                let lr = rc[a] - rb[i];
                let lc = cc[b] - cb[j];
                let (h, w) = (rows[a], cols[b]);
                let len = rb[i + 1] - rb[i];
                if c.ci != 0 {
                    if lr == lc && h == w {
                        out.ci = c.ci;
                    } else if !((lr + h).le_from(lc, n0) || (lc + w).le_from(lr, n0)) {
                        return Err(BlockError::Misaligned { row: i, col: j });
                    }
                }
                if c.ce != 0 {
                    if lc == len - (lr + h) && h == w {
                        out.ce = c.ce;
                    } else if !((lr + h + lc + w).le_from(len, n0) || len.le_from(lr + lc, n0)) {
                        return Err(BlockError::Misaligned { row: i, col: j });
                    }
                }
            }
            grid.push(out);
        }
    }
    Ok(ComboMatrix { rows, cols, grid })
}

/// For each piece between consecutive cuts, the original block holding it.
fn owners(orig: &[DimExpr], cuts: &[DimExpr]) -> Result<Vec<usize>, BlockError> {
    let mut out = Vec::with_capacity(cuts.len() - 1);
    let mut block = 0usize;
    // every original boundary occurs among the cuts, in order
    let mut next = 1usize;
    for k in 0..cuts.len() - 1 {
        while next + 1 < orig.len() && orig[next] == cuts[k] {
            block = next;
            next += 1;
        }
        if block >= orig.len() - 1 {
            return Err(BlockError::PartitionMismatch("cut beyond the last block".into()));
        }
        out.push(block);
    }
    Ok(out)
}

fn check_totals(x: DimExpr, y: DimExpr, what: &str) -> Result<(), BlockError> {
    if x == y {
        Ok(())
    } else {
        Err(BlockError::PartitionMismatch(alloc::format!("{what}: total {x} vs {y}")))
    }
}

const MAX_ROUNDS: usize = 256;

/// Common refinement so that `a.cols == b.rows`; returns the refined
/// operands. Cuts are compared on `n >= n0`.
pub fn refine_for_product(a: &ComboMatrix, b: &ComboMatrix, n0: i64) -> Result<(ComboMatrix, ComboMatrix), BlockError> {
    check_totals(a.total_cols(), b.total_rows(), "inner dimension")?;
    let mut ra = boundaries(&a.rows);
    let mut shared = boundaries(&a.cols);
    merge_cuts(&mut shared, &boundaries(&b.rows), n0)?;
    let mut cb = boundaries(&b.cols);
    for _ in 0..MAX_ROUNDS {
        let mut changed = propagate(a, &mut ra, &mut shared, n0)?;
        changed |= propagate(b, &mut shared, &mut cb, n0)?;
        if !changed {
            return Ok((rebuild(a, &ra, &shared, n0)?, rebuild(b, &shared, &cb, n0)?));
        }
    }
    Err(BlockError::RefinementDiverged)
}

/// Common refinement of two matrices of the same total shape.
pub fn refine_for_equality(a: &ComboMatrix, b: &ComboMatrix, n0: i64) -> Result<(ComboMatrix, ComboMatrix), BlockError> {
    check_totals(a.total_rows(), b.total_rows(), "rows")?;
    check_totals(a.total_cols(), b.total_cols(), "columns")?;
    let mut rc = boundaries(&a.rows);
    merge_cuts(&mut rc, &boundaries(&b.rows), n0)?;
    let mut cc = boundaries(&a.cols);
    merge_cuts(&mut cc, &boundaries(&b.cols), n0)?;
    for _ in 0..MAX_ROUNDS {
        let mut changed = propagate(a, &mut rc, &mut cc, n0)?;
        changed |= propagate(b, &mut rc, &mut cc, n0)?;
        if !changed {
            return Ok((rebuild(a, &rc, &cc, n0)?, rebuild(b, &rc, &cc, n0)?));
        }
    }
    Err(BlockError::RefinementDiverged)
}

/// Product after refining the inner partitions when they differ.
pub fn mul_refined(
    a: &ComboMatrix,
    b: &ComboMatrix,
    n0: i64,
) -> Result<(ComboMatrix, ProductDetail, Option<(ComboMatrix, ComboMatrix)>), BlockError> {
    if a.cols == b.rows {
        let (p, d) = combo_mul(a, b)?;
        return Ok((p, d, None));
    }
    let (ra, rb) = refine_for_product(a, b, n0)?;
    let (p, d) = combo_mul(&ra, &rb)?;
    Ok((p, d, Some((ra, rb))))
}

/// Equality over the integers after a common refinement.
pub fn equal_refined(a: &ComboMatrix, b: &ComboMatrix, n0: i64) -> Result<bool, BlockError> {
    if a.rows == b.rows && a.cols == b.cols {
        return Ok(a.sub(b)?.is_zero());
    }
    let (ra, rb) = refine_for_equality(a, b, n0)?;
    Ok(ra.sub(&rb)?.is_zero())
}

/// Stored matrix on a finer partition.
pub fn refine_block(a: &BlockMatrix, rows: &[DimExpr], cols: &[DimExpr], n0: i64) -> Result<BlockMatrix, BlockError> {
    let c = a.to_combo();
    let mut rc = boundaries(&a.rows);
    merge_cuts(&mut rc, &boundaries(rows), n0)?;
    let mut cc = boundaries(&a.cols);
    merge_cuts(&mut cc, &boundaries(cols), n0)?;
    for _ in 0..MAX_ROUNDS {
        if !propagate(&c, &mut rc, &mut cc, n0)? {
            return rebuild(&c, &rc, &cc, n0)?.to_block();
        }
    }
    Err(BlockError::RefinementDiverged)
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Cell {
        sym: Sym,
        sign: i8,
        rows: DimExpr,
        cols: DimExpr,
    }

    #[derive(Serialize, Deserialize)]
    struct Repr {
        row_partition: Vec<DimExpr>,
        col_partition: Vec<DimExpr>,
        grid: Vec<Vec<Cell>>,
    }

    impl Serialize for BlockMatrix {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let grid = (0..self.rows.len())
                .map(|i| {
                    (0..self.cols.len())
                        .map(|j| {
                            let b = self.get(i, j);
                            Cell { sym: b.sym, sign: b.sign, rows: self.rows[i], cols: self.cols[j] }
                        })
                        .collect()
                })
                .collect();
            Repr { row_partition: self.rows.clone(), col_partition: self.cols.clone(), grid }.serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for BlockMatrix {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let r = Repr::deserialize(d)?;
            if r.grid.len() != r.row_partition.len() {
                return Err(D::Error::custom("grid row count differs from the row partition"));
            }
            let mut grid = Vec::new();
            for (i, row) in r.grid.into_iter().enumerate() {
                if row.len() != r.col_partition.len() {
                    return Err(D::Error::custom("grid column count differs from the column partition"));
                }
                for (j, c) in row.into_iter().enumerate() {
                    if c.rows != r.row_partition[i] || c.cols != r.col_partition[j] {
                        return Err(D::Error::custom("cell size differs from the partition"));
                    }
                    grid.push(Block { sym: c.sym, sign: c.sign });
                }
            }
            BlockMatrix::new(r.row_partition, r.col_partition, grid).map_err(D::Error::custom)
        }
    }
}
