//! Semantic validation: names resolve, shapes agree, permutations are
//! automorphisms.

use std::collections::{BTreeMap, BTreeSet};

use qtp_core::rep::MorphismFamily;
use qtp_core::verify::{Formula, FormulaRef, Library, Method, Morphism, ProofScript, Shift};
use qtp_core::{BlockMatrix, Quiver, Representation};

use super::ast::*;
use super::print::reference;
use super::InputError;

fn block_matrix(m: &MatrixDecl, entity: &str) -> Result<BlockMatrix, InputError> {
    let mut seen = BTreeSet::new();
    let mut cells = Vec::with_capacity(m.blocks.len());
    for b in &m.blocks {
        let here = format!("{entity}, matrix {}", m.name);
        if b.row >= m.rows.len() || b.col >= m.cols.len() {
            return Err(InputError::semantic(
                b.loc,
                here,
                format!("block ({}, {}) is outside the {}x{} grid", b.row, b.col, m.rows.len(), m.cols.len()),
            ));
        }
        if !seen.insert((b.row, b.col)) {
            return Err(InputError::semantic(b.loc, here, format!("block ({}, {}) is given twice", b.row, b.col)));
        }
        if !b.block.is_zero() && m.rows[b.row] != m.cols[b.col] {
            return Err(InputError::semantic(
                b.loc,
                here,
                format!(
                    "block ({}, {}) holds a symbol but the cell is {} x {}",
                    b.row,
                    b.col,
                    super::dimexpr(m.rows[b.row]),
                    super::dimexpr(m.cols[b.col])
                ),
            ));
        }
        cells.push((b.row, b.col, b.block));
    }
    BlockMatrix::from_cells(m.rows.clone(), m.cols.clone(), &cells)
        .map_err(|e| InputError::semantic(m.loc, format!("{entity}, matrix {}", m.name), e.to_string()))
}

fn unique<'a>(
    kind: &str,
    items: impl Iterator<Item = (Loc, &'a str)>,
) -> Result<(), InputError> {
    let mut seen = BTreeSet::new();
    for (loc, id) in items {
        if !seen.insert(id) {
            return Err(InputError::semantic(loc, format!("{kind} {id}"), "declared twice"));
        }
    }
    Ok(())
}

fn check_ref(lib: &Library, r: &FormulaRef, quiver: &str, loc: Loc, entity: &str) -> Result<(), InputError> {
    let err = |m: String| InputError::semantic(loc, entity, m);
    let f = lib.formula(&r.formula).map_err(err)?;
    if f.quiver != quiver {
        return Err(err(format!("{} lives on quiver {}, expected {quiver}", reference(r), f.quiver)));
    }
    if let Shift::At(k) = r.shift {
        if k < f.rep.n0 {
            return Err(err(format!("{}: {k} is below the starting value {}", reference(r), f.rep.n0)));
        }
    }
    lib.resolve(r).map(|_| ()).map_err(err)
}

/// Resolves every name and checks every shape.
pub fn build_library(d: &Document) -> Result<Library, InputError> {
    let mut lib = Library::default();
    unique("quiver", d.quivers.iter().map(|q| (q.loc, q.id.as_str())))?;
    unique("formula", d.formulas.iter().map(|q| (q.loc, q.id.as_str())))?;
    unique("morphism", d.morphisms.iter().map(|q| (q.loc, q.id.as_str())))?;
    unique("proof", d.proofs.iter().map(|q| (q.loc, q.id.as_str())))?;

    for q in &d.quivers {
        let quiver = Quiver::from_owned(
            q.id.clone(),
            q.vertices.iter().map(|v| v.1.clone()).collect(),
            q.arrows.iter().map(|a| (a.id.clone(), a.source.clone(), a.target.clone())).collect(),
        )
        .map_err(|e| InputError::semantic(q.loc, format!("quiver {}", q.id), e.to_string()))?;
        lib.quivers.insert(q.id.clone(), quiver);
    }

    for f in &d.formulas {
        let entity = format!("formula {}", f.id);
        let err = |loc: Loc, m: String| InputError::semantic(loc, &entity, m);
        let q = lib.quivers.get(&f.quiver).ok_or_else(|| err(f.loc, format!("unknown quiver {}", f.quiver)))?;
        let mut mats: Vec<Option<BlockMatrix>> = vec![None; q.arrows().len()];
        for m in &f.matrices {
            let k = q.arrow_index(&m.name).ok_or_else(|| err(m.loc, format!("{} is not an arrow of {}", m.name, q.id)))?;
            if mats[k].is_some() {
                return Err(err(m.loc, format!("matrix {} is given twice", m.name)));
            }
            mats[k] = Some(block_matrix(m, &entity)?);
        }
        let mats: Vec<BlockMatrix> = mats
            .into_iter()
            .zip(q.arrows())
            .map(|(m, a)| m.ok_or_else(|| err(f.loc, format!("no matrix for arrow {}", a.id))))
            .collect::<Result<_, _>>()?;
        let mut isolated = BTreeMap::new();
        for x in &f.dims {
            let v = q.vertex_index(&x.vertex).ok_or_else(|| err(x.loc, format!("{} is not a vertex of {}", x.vertex, q.id)))?;
            if isolated.insert(v, x.dim).is_some() {
                return Err(err(x.loc, format!("dimension of {} is given twice", x.vertex)));
            }
        }
        let rep = Representation::new(q, f.id.clone(), f.n0, mats, &isolated).map_err(|e| err(f.loc, e.to_string()))?;
        for x in &f.dims {
            let v = q.vertex_index(&x.vertex).expect("checked");
            if rep.dims()[v] != x.dim {
                return Err(err(
                    x.loc,
                    format!(
                        "dimension of {} is {} by its matrices, not {}",
                        x.vertex,
                        super::dimexpr(rep.dims()[v]),
                        super::dimexpr(x.dim)
                    ),
                ));
            }
        }
        lib.formulas.insert(f.id.clone(), Formula { quiver: f.quiver.clone(), rep });
    }

    for m in &d.morphisms {
        let entity = format!("morphism {}", m.id);
        let err = |loc: Loc, s: String| InputError::semantic(loc, &entity, s);
        let qid = lib.formula(&m.source.formula).map_err(|e| err(m.loc, e))?.quiver.clone();
        check_ref(&lib, &m.source, &qid, m.loc, &entity)?;
        check_ref(&lib, &m.target, &qid, m.loc, &entity)?;
        let q = &lib.quivers[&qid];
        let from = lib.resolve(&m.source).map_err(|e| err(m.loc, e))?;
        let to = lib.resolve(&m.target).map_err(|e| err(m.loc, e))?;
        let mut maps: Vec<Option<BlockMatrix>> = vec![None; q.n_vertices()];
        for x in &m.maps {
            let v = q.vertex_index(&x.name).ok_or_else(|| err(x.loc, format!("{} is not a vertex of {}", x.name, q.id)))?;
            if maps[v].is_some() {
                return Err(err(x.loc, format!("map {} is given twice", x.name)));
            }
            let b = block_matrix(x, &entity)?;
            if b.total_rows() != to.dims()[v] || b.total_cols() != from.dims()[v] {
                return Err(err(
                    x.loc,
                    format!(
                        "map {} is {} x {}, expected {} x {}",
                        x.name,
                        super::dimexpr(b.total_rows()),
                        super::dimexpr(b.total_cols()),
                        super::dimexpr(to.dims()[v]),
                        super::dimexpr(from.dims()[v])
                    ),
                ));
            }
            maps[v] = Some(b);
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(v, b)| b.unwrap_or_else(|| BlockMatrix::zero(vec![to.dims()[v]], vec![from.dims()[v]])))
            .collect();
        lib.morphisms.insert(
            m.id.clone(),
            Morphism {
                quiver: qid,
                source: m.source.clone(),
                target: m.target.clone(),
                family: MorphismFamily { id: m.id.clone(), maps },
            },
        );
    }

    let mut targets = BTreeSet::new();
    for p in &d.proofs {
        let entity = format!("proof {}", p.id);
        let err = |s: String| InputError::semantic(p.loc, &entity, s);
        let f = lib.formula(&p.target).map_err(err)?;
        if !targets.insert(p.target.as_str()) {
            return Err(err(format!("formula {} already has a proof", p.target)));
        }
        match &p.method {
            Method::One { n } if *n < f.rep.n0 => {
                return Err(err(format!("n = {n} is below the starting value {}", f.rep.n0)));
            }
            Method::Two { base, .. } => {
                if let Some(b) = base.iter().find(|&&b| b < f.rep.n0) {
                    return Err(err(format!("base case {b} is below the starting value {}", f.rep.n0)));
                }
            }
            _ => {}
        }
        for s in p.method.pairs().into_iter().flatten() {
            check_ref(&lib, &s.sub, &f.quiver, p.loc, &entity)?;
            check_ref(&lib, &s.quot, &f.quiver, p.loc, &entity)?;
            for id in [&s.f, &s.g] {
                if !lib.morphisms.contains_key(id) {
                    return Err(err(format!("unknown morphism {id}")));
                }
            }
        }
        lib.proofs.insert(p.id.clone(), ProofScript { id: p.id.clone(), target: p.target.clone(), method: p.method.clone() });
    }
    Ok(lib)
}
