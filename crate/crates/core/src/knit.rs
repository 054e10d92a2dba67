//! Knitting of the preprojective and preinjective components of the
//! Auslander-Reiten quiver at the level of dimension vectors.
//!
//! For an arrow `i -> j` of the quiver the preprojective component has
//! arrows `P(s,j) -> P(s,i)` and `P(s,i) -> P(s+1,j)`; the preinjective
//! component has `I(s,j) -> I(s,i)` and `I(s+1,i) -> I(s,j)`. Dimension
//! vectors come from the mesh relations, starting at the projectives
//! (resp. injectives).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::DimExpr;
use crate::quiver::{DimVector, Quiver};
use crate::roots::{self, cartan_matrix, coxeter_apply, RootError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ComponentSide {
    Preprojective,
    Preinjective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ARVertex {
    pub s: u32,
    pub i: usize,
    pub dim: DimVector,
    pub side: ComponentSide,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnitError {
    #[error("vertex ({s},{i}) is not in the knitted component")]
    VertexNotFound { s: u32, i: usize },
    #[error(transparent)]
    Root(#[from] RootError),
}

/// A knitted component truncated at `max_depth`. Vertices whose dimension
/// vector is not positive (possible only for Dynkin quivers) are left out.
#[derive(Debug, Clone)]
pub struct Component {
    pub side: ComponentSide,
    pub max_depth: u32,
    n: usize,
    /// Indexed by `s * n + i`.
    dims: Vec<Vec<i64>>,
    pub vertices: Vec<ARVertex>,
    /// Arrows between indices of `vertices`, repeated with multiplicity.
    pub arrows: Vec<(usize, usize)>,
}

impl Component {
    fn slot(&self, s: u32, i: usize) -> usize {
        s as usize * self.n + i
    }

    pub fn index_of(&self, s: u32, i: usize) -> Option<usize> {
        self.vertices.iter().position(|v| v.s == s && v.i == i)
    }

    /// Mesh-computed dimension vector, including non-positive ones.
    pub fn formal_dim(&self, s: u32, i: usize) -> Option<&[i64]> {
        (s <= self.max_depth && i < self.n).then(|| self.dims[self.slot(s, i)].as_slice())
    }

    pub fn find_dim(&self, x: &[i64]) -> Option<&ARVertex> {
        self.vertices.iter().find(|v| v.dim.0 == x)
    }
}

fn add_into(acc: &mut [i64], x: &[i64], sign: i64) -> Result<(), RootError> {
    for (a, b) in acc.iter_mut().zip(x) {
        *a = b.checked_mul(sign).and_then(|v| a.checked_add(v)).ok_or(RootError::Overflow)?;
    }
    Ok(())
}

pub fn knit_component(q: &Quiver, side: ComponentSide, max_depth: u32) -> Result<Component, RootError> {
    let n = q.n_vertices();
    let c = cartan_matrix(q);
    let mut dims: Vec<Vec<i64>> = vec![Vec::new(); (max_depth as usize + 1) * n];
    for i in 0..n {
        dims[i] = match side {
            ComponentSide::Preprojective => c.col(i),
            ComponentSide::Preinjective => c.row(i).to_vec(),
        };
    }
    let topo = q.topological_order();
    for s in 0..max_depth as usize {
        let (cur, next) = (s * n, (s + 1) * n);
        match side {
            ComponentSide::Preprojective => {
                // P(s+1,j) = Σ_{i->j} P(s,i) + Σ_{j->k} P(s+1,k) − P(s,j), sinks first
                for &j in topo.iter().rev() {
                    let mut v = vec![0i64; n];
                    for a in q.arrows_into(j) {
                        add_into(&mut v, &dims[cur + a.source], 1)?;
                    }
                    for a in q.arrows_from(j) {
                        add_into(&mut v, &dims[next + a.target].clone(), 1)?;
                    }
                    add_into(&mut v, &dims[cur + j].clone(), -1)?;
                    dims[next + j] = v;
                }
            }
            ComponentSide::Preinjective => {
                // I(s+1,i) = Σ_{i->j} I(s,j) + Σ_{k->i} I(s+1,k) − I(s,i), sources first
                for &i in topo {
                    let mut v = vec![0i64; n];
                    for a in q.arrows_from(i) {
                        add_into(&mut v, &dims[cur + a.target], 1)?;
                    }
                    for a in q.arrows_into(i) {
                        add_into(&mut v, &dims[next + a.source].clone(), 1)?;
                    }
                    add_into(&mut v, &dims[cur + i].clone(), -1)?;
                    dims[next + i] = v;
                }
            }
        }
    }
    let mut vertices = Vec::new();
    let mut index = vec![None; dims.len()];
    for s in 0..=max_depth {
        for i in 0..n {
            let d = DimVector(dims[s as usize * n + i].clone());
            if d.is_positive() {
                index[s as usize * n + i] = Some(vertices.len());
                vertices.push(ARVertex { s, i, dim: d, side });
            }
        }
    }
    let mut arrows = Vec::new();
    let at = |s: u32, i: usize| index[s as usize * n + i];
    for s in 0..=max_depth {
        for a in q.arrows() {
            let (i, j) = (a.source, a.target);
            let pairs = match side {
                ComponentSide::Preprojective => [
                    Some(((s, j), (s, i))),
                    (s < max_depth).then_some(((s, i), (s + 1, j))),
                ],
                ComponentSide::Preinjective => [
                    Some(((s, j), (s, i))),
                    (s < max_depth).then_some(((s + 1, i), (s, j))),
                ],
            };
            for ((s0, v0), (s1, v1)) in pairs.into_iter().flatten() {
                if let (Some(x), Some(y)) = (at(s0, v0), at(s1, v1)) {
                    arrows.push((x, y));
                }
            }
        }
    }
    arrows.sort_unstable();
    Ok(Component { side, max_depth, n, dims, vertices, arrows })
}

/// Reachability by breadth-first search. The empty path counts.
pub fn ar_path_exists(c: &Component, from: (u32, usize), to: (u32, usize)) -> Result<bool, KnitError> {
    let src = c.index_of(from.0, from.1).ok_or(KnitError::VertexNotFound { s: from.0, i: from.1 })?;
    let dst = c.index_of(to.0, to.1).ok_or(KnitError::VertexNotFound { s: to.0, i: to.1 })?;
    let mut seen = vec![false; c.vertices.len()];
    let mut queue = VecDeque::from([src]);
    seen[src] = true;
    while let Some(v) = queue.pop_front() {
        if v == dst {
            return Ok(true);
        }
        for &(a, b) in &c.arrows {
            if a == v && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    Ok(false)
}

/// Finds `(s,i)` with `dim P(s,i) = x` (resp. `dim I(s,i) = x`). The search
/// stops once every module at the current depth is longer than `x`, which
/// happens for tame quivers since lengths grow along τ-orbits.
pub fn locate(q: &Quiver, side: ComponentSide, x: &[i64]) -> Result<Option<(u32, usize)>, RootError> {
    let n = q.n_vertices();
    let c = cartan_matrix(q);
    let len: i64 = x.iter().sum();
    let cap = (len.max(0) as u32 + 2) * (n as u32 + 1);
    let mut slice: Vec<Vec<i64>> = (0..n)
        .map(|i| match side {
            ComponentSide::Preprojective => c.col(i),
            ComponentSide::Preinjective => c.row(i).to_vec(),
        })
        .collect();
    let step: i64 = match side {
        ComponentSide::Preprojective => -1,
        ComponentSide::Preinjective => 1,
    };
    for s in 0..=cap {
        if let Some(i) = slice.iter().position(|v| v.as_slice() == x) {
            return Ok(Some((s, i)));
        }
        let shortest = slice
            .iter()
            .filter(|v| v.iter().all(|&e| e >= 0))
            .map(|v| v.iter().sum::<i64>())
            .min();
        if shortest.is_none_or(|m| m > len) {
            return Ok(None);
        }
        for v in slice.iter_mut() {
            *v = coxeter_apply(q, v, step)?;
        }
    }
    Ok(None)
}

/// Position of an affine family `x(n) = u + n·v` along the τ-orbits:
/// for `n = n_from + r + k·period` with `0 <= r < period`, `x(n)` sits at
/// `(s_r + k·ds, i_r)` where `(s_r, i_r) = residues[r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyPosition {
    pub side: ComponentSide,
    pub n_from: i64,
    pub period: u32,
    pub ds: u32,
    pub residues: Vec<(u32, usize)>,
}

impl FamilyPosition {
    pub fn at(&self, n: i64) -> (u32, usize) {
        let off = (n - self.n_from) as u32;
        let (s, i) = self.residues[(off % self.period) as usize];
        (s + self.ds * (off / self.period), i)
    }
}

/// Finds a period `p` with `x(n_from + p)` on the same orbit as
/// `x(n_from)`, `ds` steps further, and checks `Φ^{∓ds} v = v` and
/// `Φ^{∓ds} u = u + p·v`. Together these give `x(n + p) = Φ^{∓ds} x(n)` for
/// every `n`, so the positions repeat with period `p`.
pub fn locate_family(
    q: &Quiver,
    side: ComponentSide,
    x: &[DimExpr],
    n_from: i64,
) -> Result<Option<FamilyPosition>, RootError> {
    let sign = match side {
        ComponentSide::Preprojective => -1,
        ComponentSide::Preinjective => 1,
    };
    let v: Vec<i64> = x.iter().map(|d| d.a).collect();
    let u: Vec<i64> = x.iter().map(|d| d.b).collect();
    let mut residues: Vec<(u32, usize)> = Vec::new();
    for p in 0..=q.n_vertices() as u32 {
        let at = roots::eval_vector(x, n_from + i64::from(p));
        let Some(pos) = locate(q, side, &at)? else { return Ok(None) };
        if p > 0 && pos.1 == residues[0].1 && pos.0 >= residues[0].0 {
            let ds = pos.0 - residues[0].0;
            let phi_v = coxeter_apply(q, &v, sign * i64::from(ds))?;
            let phi_u = coxeter_apply(q, &u, sign * i64::from(ds))?;
            let expect: Vec<i64> = u.iter().zip(&v).map(|(a, b)| a + i64::from(p) * b).collect();
            if phi_v == v && phi_u == expect {
                return Ok(Some(FamilyPosition { side, n_from, period: p, ds, residues }));
            }
        }
        residues.push(pos);
    }
    Ok(None)
}

/// True when a path `Y(n) -> X(n)` exists for every `n >= n_from`.
///
/// Over one common period `L` both families move by a whole number of
/// τ-steps. If `X` moves at least as far as `Y` and a path exists at each
/// residue, translating that path and appending `P(s,i) -> ... -> P(s+d,i)`
/// gives a path for every `n`.
pub fn family_path_exists(q: &Quiver, y: &FamilyPosition, x: &FamilyPosition) -> Result<bool, KnitError> {
    if x.side != y.side || x.n_from != y.n_from {
        return Ok(false);
    }
    let l = lcm(x.period, y.period);
    let moved = |f: &FamilyPosition| f.ds * (l / f.period);
    if moved(x) < moved(y) {
        return Ok(false);
    }
    let depth = (0..l)
        .map(|r| x.at(x.n_from + i64::from(r)).0.max(y.at(y.n_from + i64::from(r)).0))
        .max()
        .unwrap_or(0);
    let comp = knit_component(q, x.side, depth + 1)?;
    for r in 0..l {
        let n = x.n_from + i64::from(r);
        if !ar_path_exists(&comp, y.at(n), x.at(n))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lcm(a: u32, b: u32) -> u32 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}
