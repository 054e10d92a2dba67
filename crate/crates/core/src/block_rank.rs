//! Full-rank certificates for block matrices.
//!
//! A block column is cleared around a pivot `±I` or `±E` with row
//! operations `r_i <- r_i + c·r_p`, `c ∈ {±I, ±E}`, and the pivot row is
//! then cleared with column operations. Every intermediate matrix must be a
//! stored block matrix. A pivot is invertible over every field, so a
//! certificate shows full rank for every `n` in range and every field.

use alloc::vec::Vec;
use core::fmt;

use crate::block::{BlockError, BlockMatrix, Combo};
use crate::Side;
use crate::{Block, Sym};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "op", rename_all = "kebab-case"))]
pub enum BlockOpKind {
    /// `r_target <- r_target + coef · r_source`
    AddRow { target: usize, source: usize, coef: BlockCoef },
    /// `c_target <- c_target + c_source · coef`
    AddCol { target: usize, source: usize, coef: BlockCoef },
}

/// A multiplier `±I` or `±E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockCoef {
    pub sym: Sym,
    pub sign: i8,
}

impl BlockCoef {
    fn from_combo(c: Combo) -> Option<BlockCoef> {
        match c.to_block()? {
            b if b.is_zero() => None,
            b => Some(BlockCoef { sym: b.sym, sign: b.sign }),
        }
    }

    pub fn block(self) -> Block {
        Block { sym: self.sym, sign: self.sign }
    }
}

impl fmt::Display for BlockCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.block())
    }
}

impl fmt::Display for BlockOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, t, s, coef) = match *self {
            BlockOpKind::AddRow { target, source, coef } => ('R', target, source, coef),
            BlockOpKind::AddCol { target, source, coef } => ('C', target, source, coef),
        };
        let (op, mag) = if coef.sign < 0 { ('-', coef.sym) } else { ('+', coef.sym) };
        let m = if mag == Sym::I { "" } else { "E" };
        match c {
            'R' => write!(f, "R{} <- R{} {op} {m}R{}", t + 1, t + 1, s + 1),
            _ => write!(f, "C{} <- C{} {op} C{}{m}", t + 1, t + 1, s + 1),
        }
    }
}

/// An operation with the matrix it produced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockStep {
    pub kind: BlockOpKind,
    pub after: BlockMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockRankCertificate {
    pub side: Side,
    pub steps: Vec<BlockStep>,
    /// `(row, col)` of each pivot in the final matrix.
    pub pivots: Vec<(usize, usize)>,
    pub input: BlockMatrix,
}

impl BlockRankCertificate {
    pub fn final_matrix(&self) -> &BlockMatrix {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.input)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockRankError {
    #[error("block {side} {index} has no admissible pivot", side = side_word(*.side))]
    NoPivot { side: Side, index: usize },
    #[error("no admissible block elimination within {0} search nodes")]
    BudgetExhausted(u64),
    #[error(transparent)]
    Block(#[from] BlockError),
}

fn side_word(s: Side) -> &'static str {
    match s {
        Side::Column => "column",
        Side::Row => "row",
    }
}

/// Applies one operation, failing if a cell leaves the block alphabet.
pub fn apply_block_op(m: &BlockMatrix, op: BlockOpKind) -> Result<BlockMatrix, BlockError> {
    let mut c = m.to_combo();
    let w = c.cols.len();
    match op {
        BlockOpKind::AddRow { target, source, coef } => {
            if c.rows[target] != c.rows[source] {
                return Err(BlockError::PartitionMismatch("row operation between blocks of different size".into()));
            }
            let k = coef.block().combo();
            for j in 0..w {
                let add = k.mul(c.grid[source * w + j]);
                c.grid[target * w + j] = c.grid[target * w + j].add(add);
            }
        }
        BlockOpKind::AddCol { target, source, coef } => {
            if c.cols[target] != c.cols[source] {
                return Err(BlockError::PartitionMismatch("column operation between blocks of different size".into()));
            }
            let k = coef.block().combo();
            for i in 0..c.rows.len() {
                let add = c.grid[i * w + source].mul(k);
                c.grid[i * w + target] = c.grid[i * w + target].add(add);
            }
        }
    }
    c.to_block()
}

/// Replays a certificate and checks each recorded snapshot.
pub fn replay_block(cert: &BlockRankCertificate) -> Result<bool, BlockError> {
    let mut m = cert.input.clone();
    for s in &cert.steps {
        m = apply_block_op(&m, s.kind)?;
        if m != s.after {
            return Ok(false);
        }
    }
    Ok(true)
}

fn size_zero(d: crate::DimExpr) -> bool {
    d.is_constant() && d.b == 0
}

struct Search {
    budget: u64,
    nodes: u64,
}

impl Search {
    fn run(
        &mut self,
        m: &BlockMatrix,
        col: usize,
        used_rows: &mut Vec<bool>,
        steps: &mut Vec<BlockStep>,
        pivots: &mut Vec<(usize, usize)>,
    ) -> Result<bool, BlockRankError> {
        let (h, w) = (m.row_partition().len(), m.col_partition().len());
        let mut col = col;
        while col < w && size_zero(m.col_partition()[col]) {
            col += 1;
        }
        if col == w {
            return Ok(true);
        }
        let mut candidates: Vec<usize> = (0..h).filter(|&i| !used_rows[i] && !m.get(i, col).is_zero()).collect();
        // fewest nonzero cells first
        candidates.sort_by_key(|&i| ((0..w).filter(|&j| !m.get(i, j).is_zero()).count(), i));
        if candidates.is_empty() {
            return Ok(false);
        }
        for p in candidates {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(BlockRankError::BudgetExhausted(self.budget));
            }
            let mark = steps.len();
            if let Some(next) = eliminate(m, p, col, steps)? {
                used_rows[p] = true;
                pivots.push((p, col));
                if self.run(&next, col + 1, used_rows, steps, pivots)? {
                    return Ok(true);
                }
                pivots.pop();
                used_rows[p] = false;
            }
            steps.truncate(mark);
        }
        Ok(false)
    }
}

/// Clears column `col` and then row `p` around the pivot at `(p, col)`.
/// `None` when some row operation leaves the block alphabet.
fn eliminate(m: &BlockMatrix, p: usize, col: usize, steps: &mut Vec<BlockStep>) -> Result<Option<BlockMatrix>, BlockError> {
    let x = m.get(p, col).combo();
    let mut cur = m.clone();
    for i in 0..m.row_partition().len() {
        let y = cur.get(i, col);
        if i == p || y.is_zero() {
            continue;
        }
        // x is its own inverse up to sign: (±I)(±I) = I, (±E)(±E) = I
        let coef = BlockCoef::from_combo(y.combo().mul(x).neg()).expect("nonzero");
        let kind = BlockOpKind::AddRow { target: i, source: p, coef };
        match apply_block_op(&cur, kind) {
            Ok(next) => {
                cur = next;
                steps.push(BlockStep { kind, after: cur.clone() });
            }
            Err(BlockError::ClosureViolation { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    for j in 0..m.col_partition().len() {
        let y = cur.get(p, j);
        if j == col || y.is_zero() {
            continue;
        }
        let coef = BlockCoef::from_combo(x.mul(y.combo()).neg()).expect("nonzero");
        let kind = BlockOpKind::AddCol { target: j, source: col, coef };
        // only the pivot row is nonzero in column `col`, so this cannot overflow
        cur = apply_block_op(&cur, kind)?;
        steps.push(BlockStep { kind, after: cur.clone() });
    }
    Ok(Some(cur))
}

fn transpose_kind(k: BlockOpKind) -> BlockOpKind {
    match k {
        BlockOpKind::AddRow { target, source, coef } => BlockOpKind::AddCol { target, source, coef },
        BlockOpKind::AddCol { target, source, coef } => BlockOpKind::AddRow { target, source, coef },
    }
}

/// Certifies full block column (or row) rank for every `n` where the sizes
/// are valid.
pub fn bm_full_rank_check(a: &BlockMatrix, side: Side, budget: u64) -> Result<BlockRankCertificate, BlockRankError> {
    let work = match side {
        Side::Column => a.clone(),
        Side::Row => a.transpose(),
    };
    let mut search = Search { budget, nodes: 0 };
    let mut steps = Vec::new();
    let mut pivots = Vec::new();
    let mut used = vec_false(work.row_partition().len());
    if !search.run(&work, 0, &mut used, &mut steps, &mut pivots)? {
        let idx = first_unpivoted(&work);
        return Err(BlockRankError::NoPivot { side, index: idx });
    }
    if side == Side::Row {
        for s in &mut steps {
            s.kind = transpose_kind(s.kind);
            s.after = s.after.transpose();
        }
        for p in &mut pivots {
            *p = (p.1, p.0);
        }
    }
    Ok(BlockRankCertificate { side, steps, pivots, input: a.clone() })
}

fn vec_false(n: usize) -> Vec<bool> {
    alloc::vec![false; n]
}

fn first_unpivoted(m: &BlockMatrix) -> usize {
    (0..m.col_partition().len())
        .find(|&j| !size_zero(m.col_partition()[j]) && (0..m.row_partition().len()).all(|i| m.get(i, j).is_zero()))
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::instantiate;
    use crate::fi::fi_full_rank_check;
    use crate::DimExpr;
    use alloc::vec;

    fn n() -> DimExpr {
        DimExpr::N
    }

    #[test]
    fn pivot_in_place() {
        let m = BlockMatrix::from_cells(vec![n(), n()], vec![n()], &[(0, 0, Block::I)]).unwrap();
        let c = bm_full_rank_check(&m, Side::Column, 100).unwrap();
        assert!(c.steps.is_empty());
        assert_eq!(c.pivots, vec![(0, 0)]);
    }

    #[test]
    fn exchange_over_identity() {
        let m = BlockMatrix::new(vec![n(), n()], vec![n()], vec![Block::E, Block::I]).unwrap();
        let c = bm_full_rank_check(&m, Side::Column, 100).unwrap();
        assert_eq!(c.steps.len(), 1);
        assert!(c.final_matrix().get(1, 0).is_zero() || c.final_matrix().get(0, 0).is_zero());
        assert!(replay_block(&c).unwrap());
    }

    #[test]
    fn too_few_rows() {
        let m = BlockMatrix::new(vec![n()], vec![n(), n()], vec![Block::I, Block::I]).unwrap();
        assert!(matches!(bm_full_rank_check(&m, Side::Column, 100), Err(BlockRankError::NoPivot { .. })));
        let r = bm_full_rank_check(&m, Side::Row, 100).unwrap();
        assert!(replay_block(&r).unwrap());
        assert_eq!(r.final_matrix().get(0, 1), Block::ZERO);
    }

    #[test]
    fn closure_blocks_a_pivot_choice() {
        // [[I, I], [I, -I]]: clearing gives -2I, which no stored matrix holds
        let m = BlockMatrix::new(vec![n(), n()], vec![n(), n()], vec![Block::I, Block::I, Block::I, Block::NEG_I]).unwrap();
        assert!(bm_full_rank_check(&m, Side::Column, 100).is_err());
    }

    #[test]
    fn certified_implies_concrete_rank() {
        let m = BlockMatrix::from_cells(
            vec![n(), DimExpr::ONE, n()],
            vec![n(), n()],
            &[(0, 0, Block::I), (2, 0, Block::E), (2, 1, Block::I)],
        )
        .unwrap();
        bm_full_rank_check(&m, Side::Column, 100).unwrap();
        for k in 0..6 {
            fi_full_rank_check(&instantiate(&m, k).unwrap(), Side::Column, 10_000).unwrap();
        }
    }

    #[test]
    fn zero_size_columns_are_vacuous() {
        let m = BlockMatrix::zero(vec![n()], vec![DimExpr::ZERO]);
        assert!(bm_full_rank_check(&m, Side::Column, 10).is_ok());
    }
}
