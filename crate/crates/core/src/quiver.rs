//! Quivers, integer vectors indexed by vertices, and dense integer matrices.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Deref, Index, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuiverError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow `{0}`")]
    DuplicateArrow(String),
    #[error("arrow `{arrow}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { arrow: String, vertex: String },
    #[error("arrow `{0}` is a loop")]
    Loop(String),
    #[error("quiver contains an oriented cycle through `{0}`")]
    Cycle(String),
    #[error("`{0}` is neither a vertex nor an arrow")]
    UnknownName(String),
    #[error("permutation is not a quiver automorphism: {0}")]
    NotAutomorphism(String),
    #[error("vector has length {got}, quiver has {expected} vertices")]
    DimMismatch { expected: usize, got: usize },
    #[error("integer overflow")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub id: String,
    pub source: usize,
    pub target: usize,
}

/// A finite acyclic quiver. Parallel arrows are allowed, loops are not.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quiver {
    pub id: String,
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    topo: Vec<usize>,
}

impl Quiver {
    pub fn new(
        id: impl Into<String>,
        vertices: &[&str],
        arrows: &[(&str, &str, &str)],
    ) -> Result<Self, QuiverError> {
        Self::from_owned(
            id.into(),
            vertices.iter().map(|v| String::from(*v)).collect(),
            arrows
                .iter()
                .map(|(a, s, t)| (String::from(*a), String::from(*s), String::from(*t)))
                .collect(),
        )
    }

    pub fn from_owned(
        id: String,
        vertices: Vec<String>,
        arrows: Vec<(String, String, String)>,
    ) -> Result<Self, QuiverError> {
        for (k, v) in vertices.iter().enumerate() {
            if vertices[..k].contains(v) {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        let mut out: Vec<Arrow> = Vec::with_capacity(arrows.len());
        for (a, s, t) in arrows {
            if out.iter().any(|x| x.id == a) || vertices.contains(&a) {
                return Err(QuiverError::DuplicateArrow(a));
            }
            let find = |v: &String| {
                vertices.iter().position(|x| x == v).ok_or_else(|| QuiverError::UnknownVertex {
                    arrow: a.clone(),
                    vertex: v.clone(),
                })
            };
            let (si, ti) = (find(&s)?, find(&t)?);
            if si == ti {
                return Err(QuiverError::Loop(a));
            }
            out.push(Arrow { id: a, source: si, target: ti });
        }
        let topo = topological_order(vertices.len(), &out)
            .map_err(|v| QuiverError::Cycle(vertices[v].clone()))?;
        Ok(Quiver { id, vertices, arrows: out, topo })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == name)
    }

    /// Vertices ordered so that every arrow points forward (sources first).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn arrows_from(&self, v: usize) -> impl Iterator<Item = &Arrow> {
        self.arrows.iter().filter(move |a| a.source == v)
    }

    pub fn arrows_into(&self, v: usize) -> impl Iterator<Item = &Arrow> {
        self.arrows.iter().filter(move |a| a.target == v)
    }

    /// `A[i][j]` = number of arrows `j -> i`.
    pub fn adjacency(&self) -> IntMatrix {
        let n = self.n_vertices();
        let mut m = IntMatrix::zero(n, n);
        for a in &self.arrows {
            m[(a.target, a.source)] += 1;
        }
        m
    }

    pub fn check_len(&self, x: &[i64]) -> Result<(), QuiverError> {
        if x.len() == self.n_vertices() {
            Ok(())
        } else {
            Err(QuiverError::DimMismatch { expected: self.n_vertices(), got: x.len() })
        }
    }

    /// Builds an automorphism from `name -> name` pairs meaning `σ(a) = b`.
    ///
    /// Names may be vertices or arrows. Unlisted vertices are fixed. Unlisted
    /// arrows are matched, in order, with the still unused arrows between the
    /// image endpoints.
    pub fn automorphism(&self, pairs: &[(String, String)]) -> Result<Automorphism, QuiverError> {
        let nv = self.n_vertices();
        let na = self.arrows.len();
        let mut vmap: Vec<Option<usize>> = vec![None; nv];
        let mut amap: Vec<Option<usize>> = vec![None; na];
        for (a, b) in pairs {
            if let (Some(i), Some(j)) = (self.vertex_index(a), self.vertex_index(b)) {
                if vmap[i].replace(j).is_some_and(|old| old != j) {
                    return Err(QuiverError::NotAutomorphism(alloc::format!("`{a}` mapped twice")));
                }
            } else if let (Some(i), Some(j)) = (self.arrow_index(a), self.arrow_index(b)) {
                if amap[i].replace(j).is_some_and(|old| old != j) {
                    return Err(QuiverError::NotAutomorphism(alloc::format!("`{a}` mapped twice")));
                }
            } else {
                let bad = if self.vertex_index(a).is_none() && self.arrow_index(a).is_none() {
                    a
                } else {
                    b
                };
                return Err(QuiverError::UnknownName(bad.clone()));
            }
        }
        let vertex: Vec<usize> = vmap.iter().enumerate().map(|(i, m)| m.unwrap_or(i)).collect();
        if !is_permutation(&vertex) {
            return Err(QuiverError::NotAutomorphism("vertex map is not a bijection".into()));
        }
        let mut used = vec![false; na];
        for j in amap.iter().flatten() {
            if core::mem::replace(&mut used[*j], true) {
                return Err(QuiverError::NotAutomorphism("arrow map is not a bijection".into()));
            }
        }
        for k in 0..na {
            if amap[k].is_some() {
                continue;
            }
            let a = &self.arrows[k];
            let (s, t) = (vertex[a.source], vertex[a.target]);
            let pick = (0..na).find(|&j| {
                !used[j] && self.arrows[j].source == s && self.arrows[j].target == t
            });
            match pick {
                Some(j) => {
                    used[j] = true;
                    amap[k] = Some(j);
                }
                None => {
                    return Err(QuiverError::NotAutomorphism(alloc::format!(
                        "no image for arrow `{}`",
                        a.id
                    )))
                }
            }
        }
        let arrow: Vec<usize> = amap.into_iter().map(|m| m.unwrap_or(0)).collect();
        let aut = Automorphism { vertex, arrow };
        self.validate_automorphism(&aut)?;
        Ok(aut)
    }

    pub fn validate_automorphism(&self, aut: &Automorphism) -> Result<(), QuiverError> {
        if aut.vertex.len() != self.n_vertices() || aut.arrow.len() != self.arrows.len() {
            return Err(QuiverError::NotAutomorphism("wrong length".into()));
        }
        if !is_permutation(&aut.vertex) || !is_permutation(&aut.arrow) {
            return Err(QuiverError::NotAutomorphism("not a bijection".into()));
        }
        for (k, a) in self.arrows.iter().enumerate() {
            let b = &self.arrows[aut.arrow[k]];
            if b.source != aut.vertex[a.source] || b.target != aut.vertex[a.target] {
                return Err(QuiverError::NotAutomorphism(alloc::format!(
                    "arrow `{}` is sent to `{}` with different endpoints",
                    a.id,
                    b.id
                )));
            }
        }
        Ok(())
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !core::mem::replace(&mut seen[i], true))
}

/// Kahn's algorithm; on failure returns a vertex on a cycle.
fn topological_order(n: usize, arrows: &[Arrow]) -> Result<Vec<usize>, usize> {
    let mut indeg = vec![0usize; n];
    for a in arrows {
        indeg[a.target] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for a in arrows.iter().filter(|a| a.source == v) {
            indeg[a.target] -= 1;
            if indeg[a.target] == 0 {
                queue.push_back(a.target);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&v| indeg[v] > 0).unwrap_or(0))
    }
}

/// A vertex and arrow permutation `σ`. The permuted representation `M̃` has
/// `M̃_i = M_{σ(i)}` and `M̃_α = M_{σ(α)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub vertex: Vec<usize>,
    pub arrow: Vec<usize>,
}

impl Automorphism {
    pub fn identity(q: &Quiver) -> Self {
        Automorphism {
            vertex: (0..q.n_vertices()).collect(),
            arrow: (0..q.arrows().len()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex.iter().enumerate().all(|(i, &j)| i == j)
            && self.arrow.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            vertex: other.vertex.iter().map(|&i| self.vertex[i]).collect(),
            arrow: other.arrow.iter().map(|&i| self.arrow[i]).collect(),
        }
    }

    /// Permutes a vertex-indexed vector: `out[i] = x[σ(i)]`.
    pub fn pull_vertices<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.vertex.iter().map(|&j| x[j].clone()).collect()
    }

    /// Permutes an arrow-indexed vector: `out[α] = x[σ(α)]`.
    pub fn pull_arrows<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.arrow.iter().map(|&j| x[j].clone()).collect()
    }
}

/// An integer vector indexed by the vertices of a quiver.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DimVector(pub Vec<i64>);

impl DimVector {
    pub fn zero(n: usize) -> Self {
        DimVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        DimVector(v)
    }

    /// All entries non-negative and not all zero.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x >= 0) && self.0.iter().any(|&x| x != 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &DimVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn length(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn scale(&self, k: i64) -> DimVector {
        DimVector(self.0.iter().map(|x| x * k).collect())
    }
}

impl From<Vec<i64>> for DimVector {
    fn from(v: Vec<i64>) -> Self {
        DimVector(v)
    }
}

impl Deref for DimVector {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl Add for &DimVector {
    type Output = DimVector;
    fn add(self, o: &DimVector) -> DimVector {
        DimVector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DimVector {
    type Output = DimVector;
    fn sub(self, o: &DimVector) -> DimVector {
        DimVector(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Dense integer matrix with overflow-checked products.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        IntMatrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn checked_sub(&self, o: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.checked_sub(*b)).collect::<Option<_>>()?;
        Some(IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_mul(&self, o: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, o.rows, "inner dimensions differ");
        let mut out = Self::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc: i64 = 0;
                for k in 0..self.cols {
                    acc = acc.checked_add(self[(i, k)].checked_mul(o[(k, j)])?)?;
                }
                out[(i, j)] = acc;
            }
        }
        Some(out)
    }

    /// `M · xᵗ`, the column convention used for the Coxeter transformation.
    pub fn checked_apply(&self, x: &[i64]) -> Option<Vec<i64>> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .try_fold(0i64, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?))
            })
            .collect()
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", DimVector(self.row(i).to_vec()))?;
        }
        write!(f, "]")
    }
}

/// Standard test quivers.
pub mod examples {
    use super::Quiver;

    /// `1 -> 2`.
    pub fn a2() -> Quiver {
        Quiver::new("A2", &["1", "2"], &[("a", "1", "2")]).unwrap()
    }

    /// Two arrows `1 => 2`.
    pub fn kronecker() -> Quiver {
        Quiver::new("K", &["1", "2"], &[("a", "1", "2"), ("b", "1", "2")]).unwrap()
    }

    /// Four arms pointing into the center `c`.
    pub fn d4_subspace() -> Quiver {
        Quiver::new(
            "D4",
            &["c", "1", "2", "3", "4"],
            &[("a1", "1", "c"), ("a2", "2", "c"), ("a3", "3", "c"), ("a4", "4", "c")],
        )
        .unwrap()
    }
}
