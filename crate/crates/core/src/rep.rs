//! Representations given by 0/1 block matrices, their concrete
//! instantiations, and morphism families between them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::block::{self, BlockError, BlockMatrix};
use crate::expr::{DimExpr, PolyN};
use crate::fi::FiMatrix;
use crate::quiver::{Automorphism, DimVector, Quiver, QuiverError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepError {
    #[error("arrow {arrow}: expected {expected} matrices, got {got}")]
    ArrowCount { arrow: String, expected: usize, got: usize },
    #[error("vertex {vertex}: arrow {arrow} gives dimension {found}, another arrow gives {expected}")]
    InconsistentDim { vertex: String, arrow: String, expected: DimExpr, found: DimExpr },
    #[error("arrow {arrow}: entries must be 0 or 1")]
    NegativeEntry { arrow: String },
    #[error("vertex {vertex}: dimension {dim} is negative for some n >= {n0}")]
    NegativeDim { vertex: String, dim: DimExpr, n0: i64 },
    #[error("parameter {n} is below the formula's starting value {n0}")]
    BelowStart { n: i64, n0: i64 },
    #[error("vertex {vertex}: map is {rows}x{cols}, expected {erows}x{ecols}")]
    MapShape { vertex: String, rows: DimExpr, cols: DimExpr, erows: DimExpr, ecols: DimExpr },
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// A (possibly parametrized) representation. Matrix `k` belongs to arrow
/// `k` and has shape `dim(target) x dim(source)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Representation {
    pub id: String,
    pub n0: i64,
    dims: Vec<DimExpr>,
    mats: Vec<BlockMatrix>,
}

impl Representation {
    /// Derives the vertex dimensions from the arrow matrices. A vertex with
    /// no incident arrow gets the dimension in `isolated`, default 0.
    pub fn new(
        q: &Quiver,
        id: impl Into<String>,
        n0: i64,
        mats: Vec<BlockMatrix>,
        isolated: &BTreeMap<usize, DimExpr>,
    ) -> Result<Self, RepError> {
        if mats.len() != q.arrows().len() {
            return Err(RepError::ArrowCount { arrow: String::from("*"), expected: q.arrows().len(), got: mats.len() });
        }
        let mut dims: Vec<Option<DimExpr>> = alloc::vec![None; q.n_vertices()];
        for (arrow, m) in q.arrows().iter().zip(&mats) {
            if m.has_negative() {
                return Err(RepError::NegativeEntry { arrow: arrow.id.clone() });
            }
            for (v, d) in [(arrow.target, m.total_rows()), (arrow.source, m.total_cols())] {
                match dims[v] {
                    None => dims[v] = Some(d),
                    Some(e) if e == d => {}
                    Some(e) => {
                        return Err(RepError::InconsistentDim {
                            vertex: q.vertices()[v].clone(),
                            arrow: arrow.id.clone(),
                            expected: e,
                            found: d,
                        })
                    }
                }
            }
        }
        let dims: Vec<DimExpr> = dims
            .into_iter()
            .enumerate()
            .map(|(v, d)| d.or_else(|| isolated.get(&v).copied()).unwrap_or(DimExpr::ZERO))
            .collect();
        for (v, &d) in dims.iter().enumerate() {
            if !d.nonneg_from(n0) {
                return Err(RepError::NegativeDim { vertex: q.vertices()[v].clone(), dim: d, n0 });
            }
        }
        Ok(Representation { id: id.into(), n0, dims, mats })
    }

    pub fn dims(&self) -> &[DimExpr] {
        &self.dims
    }

    pub fn matrices(&self) -> &[BlockMatrix] {
        &self.mats
    }

    pub fn matrix(&self, arrow: usize) -> &BlockMatrix {
        &self.mats[arrow]
    }

    pub fn is_constant(&self) -> bool {
        self.dims.iter().all(|d| d.is_constant()) && self.mats.iter().all(|m| m.is_constant())
    }

    /// The family at `n - c`.
    pub fn shift(&self, c: i64) -> Representation {
        Representation {
            id: self.id.clone(),
            n0: self.n0 + c,
            dims: self.dims.iter().map(|d| d.shift(c)).collect(),
            mats: self.mats.iter().map(|m| m.shift(c)).collect(),
        }
    }

    /// The family with `n` fixed to `k`; a constant representation.
    pub fn fix(&self, k: i64) -> Representation {
        Representation {
            id: self.id.clone(),
            n0: 0,
            dims: self.dims.iter().map(|d| d.fix(k)).collect(),
            mats: self.mats.iter().map(|m| m.fix(k)).collect(),
        }
    }
}

/// A representation with concrete 0/1 matrices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConcreteRep {
    pub dims: DimVector,
    pub mats: Vec<FiMatrix>,
}

impl ConcreteRep {
    pub fn new(q: &Quiver, dims: Vec<i64>, mats: Vec<FiMatrix>) -> Result<Self, RepError> {
        if mats.len() != q.arrows().len() {
            return Err(RepError::ArrowCount { arrow: String::from("*"), expected: q.arrows().len(), got: mats.len() });
        }
        for (arrow, m) in q.arrows().iter().zip(&mats) {
            if m.entries().iter().any(|&v| v < 0) {
                return Err(RepError::NegativeEntry { arrow: arrow.id.clone() });
            }
            let want = (dims[arrow.target], dims[arrow.source]);
            let got = (m.rows() as i64, m.cols() as i64);
            if want != got {
                let v = if want.0 != got.0 { arrow.target } else { arrow.source };
                return Err(RepError::InconsistentDim {
                    vertex: q.vertices()[v].clone(),
                    arrow: arrow.id.clone(),
                    expected: DimExpr::constant(if want.0 != got.0 { want.0 } else { want.1 }),
                    found: DimExpr::constant(if want.0 != got.0 { got.0 } else { got.1 }),
                });
            }
        }
        Ok(ConcreteRep { dims: DimVector(dims), mats })
    }

    pub fn length(&self) -> i64 {
        self.dims.length()
    }

    pub fn ones(&self) -> usize {
        self.mats.iter().map(|m| m.count_ones()).sum()
    }
}

/// Dimension vector (symbolic) and length.
pub fn dim_and_length(m: &Representation) -> (Vec<DimExpr>, PolyN) {
    let len: DimExpr = m.dims.iter().copied().sum();
    (m.dims.clone(), PolyN::from(len))
}

/// Number of ones equals length minus one, as polynomials in `n`.
pub fn check_tree_count(m: &Representation) -> Result<bool, RepError> {
    let ones: PolyN = m.mats.iter().map(|b| b.ones_count_sym()).sum::<Result<PolyN, _>>()?;
    let (_, len) = dim_and_length(m);
    Ok(ones == len - PolyN::constant(1))
}

pub fn check_tree_count_concrete(m: &ConcreteRep) -> bool {
    m.ones() as i64 == m.length() - 1
}

/// Ones counted symbolically, and the length.
pub fn tree_count(m: &Representation) -> Result<(PolyN, PolyN), RepError> {
    let ones: PolyN = m.mats.iter().map(|b| b.ones_count_sym()).sum::<Result<PolyN, _>>()?;
    Ok((ones, dim_and_length(m).1))
}

/// The coefficient quiver: basis vectors joined at every nonzero entry.
/// Connected with `ℓ - 1` edges.
pub fn coefficient_quiver_is_tree(q: &Quiver, m: &ConcreteRep) -> bool {
    let mut offset = Vec::with_capacity(m.dims.len() + 1);
    let mut acc = 0usize;
    for &d in m.dims.iter() {
        offset.push(acc);
        acc += d as usize;
    }
    let total = acc;
    let mut edges = 0usize;
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = total;
    for (arrow, mat) in q.arrows().iter().zip(&m.mats) {
        for r in 0..mat.rows() {
            for c in 0..mat.cols() {
                if mat.get(r, c) != 0 {
                    edges += 1;
                    let a = find(&mut parent, offset[arrow.source] + c);
                    let b = find(&mut parent, offset[arrow.target] + r);
                    if a != b {
                        parent[a] = b;
                        components -= 1;
                    }
                }
            }
        }
    }
    total > 0 && components == 1 && edges == total - 1
}

/// `M~_i = M_{σ(i)}`, `M~_α = M_{σ(α)}`.
pub fn permute_representation(q: &Quiver, m: &Representation, sigma: &Automorphism) -> Result<Representation, RepError> {
    q.validate_automorphism(sigma)?;
    Ok(Representation {
        id: m.id.clone(),
        n0: m.n0,
        dims: sigma.pull_vertices(&m.dims),
        mats: sigma.pull_arrows(&m.mats),
    })
}

pub fn instantiate_formula(q: &Quiver, m: &Representation, n: i64) -> Result<ConcreteRep, RepError> {
    if n < m.n0 {
        return Err(RepError::BelowStart { n, n0: m.n0 });
    }
    let mats = m.mats.iter().map(|b| block::instantiate(b, n)).collect::<Result<Vec<_>, _>>()?;
    let mut dims = Vec::with_capacity(m.dims.len());
    for (v, d) in m.dims.iter().enumerate() {
        let x = d.eval(n);
        if x < 0 {
            return Err(RepError::NegativeDim { vertex: q.vertices()[v].clone(), dim: *d, n0: n });
        }
        dims.push(x);
    }
    ConcreteRep::new(q, dims, mats)
}

/// Per-vertex maps `source -> target`; map `i` is `dim_t(i) x dim_s(i)`.
/// Entries lie in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MorphismFamily {
    pub id: String,
    pub maps: Vec<BlockMatrix>,
}

impl MorphismFamily {
    pub fn shift(&self, c: i64) -> MorphismFamily {
        MorphismFamily { id: self.id.clone(), maps: self.maps.iter().map(|m| m.shift(c)).collect() }
    }

    pub fn fix(&self, k: i64) -> MorphismFamily {
        MorphismFamily { id: self.id.clone(), maps: self.maps.iter().map(|m| m.fix(k)).collect() }
    }

    /// Lists every vertex whose map does not have shape `dim(to) x dim(from)`.
    pub fn shape_errors(&self, q: &Quiver, from: &[DimExpr], to: &[DimExpr]) -> Vec<(usize, RepError)> {
        let mut out = Vec::new();
        for (v, m) in self.maps.iter().enumerate() {
            let (r, c) = (m.total_rows(), m.total_cols());
            if r != to[v] || c != from[v] {
                out.push((
                    v,
                    RepError::MapShape { vertex: q.vertices()[v].clone(), rows: r, cols: c, erows: to[v], ecols: from[v] },
                ));
            }
        }
        out
    }
}
