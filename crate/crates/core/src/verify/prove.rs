//! Runs a proof together with every proof it depends on.
//!
//! Proofs that cite each other form a group that is certified jointly by
//! induction on `n`. For a formula `F` with starting value `n0_F` and base
//! cases `base(F)`, the inductive step starts at `s_F`, the least `n >= n0_F`
//! outside `base(F)`. A citation of a group member `Q` at `n - c` is sound
//! when `s_F - c >= n0_Q`: every smaller value is either a base case of `Q`
//! or handled earlier in the induction. Citations at `n` itself must not
//! form a cycle.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::endo::prove_end_dim_one;
use super::registry::{Coverage, FormulaRegistry};
use super::script::{FormulaRef, Library, Method, ProofScript, SesRef, Shift};
use super::ses::{verify_ses, SesInput};
use super::two_ses::verify_two_ses_hypotheses;
use super::{Executor, Failure, FailureKind, Job, JobOutput};
use crate::quiver::{DimVector, Quiver};
use crate::rep::{self, Representation};
use crate::roots::{self, QuiverKind, SchofieldOrder};
use crate::trace::{self, ProofTrace, Snapshot, Step, StepKind, TraceMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProveOptions {
    pub budget: u64,
    pub order: SchofieldOrder,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions { budget: crate::DEFAULT_BACKTRACK_LIMIT, order: SchofieldOrder::SubFirst }
    }
}

#[derive(Debug, Clone)]
pub struct ProofRun {
    pub trace: ProofTrace,
    pub certified: bool,
    pub failures: Vec<Failure>,
    pub registry: FormulaRegistry,
}

impl ProofRun {
    /// 0 certified, 1 refused, 2 bad input, 3 budget exhausted. Input
    /// errors win over refusals, refusals over budget exhaustion.
    pub fn exit_code(&self) -> i32 {
        if self.certified {
            return 0;
        }
        let has = |k: FailureKind| self.failures.iter().any(|f| f.kind == k);
        if has(FailureKind::Input) {
            2
        } else if has(FailureKind::Refused) || !has(FailureKind::Budget) {
            1
        } else {
            3
        }
    }
}

/// Proves `proof_id` and everything it cites.
pub fn prove(lib: &Library, proof_id: &str, opts: &ProveOptions, exec: &dyn Executor) -> ProofRun {
    let mut run = ProofRun {
        trace: ProofTrace::default(),
        certified: false,
        failures: Vec::new(),
        registry: FormulaRegistry::default(),
    };
    let Some(root) = lib.proofs.get(proof_id) else {
        run.failures.push(Failure::input(format!("unknown proof {proof_id}")));
        return run;
    };
    run.trace.meta = TraceMeta {
        formula: root.target.clone(),
        proof: root.id.clone(),
        method: root.method.number(),
        ..TraceMeta::default()
    };
    let groups = match plan_groups(lib, root) {
        Ok(g) => g,
        Err(f) => {
            run.failures.push(f);
            return run;
        }
    };
    for group in groups {
        let ok = run_group(lib, &group, opts, exec, &mut run);
        if !ok {
            break;
        }
    }
    run.certified = run.failures.is_empty() && run.registry.get(&root.target).is_some();
    let verdict = if run.certified {
        format!("Formula {} is certified.", root.target)
    } else {
        format!("Formula {} is not certified.", root.target)
    };
    run.trace.steps.push(Step { kind: StepKind::Conclusion, ..Step::note(verdict) });
    run
}

/// Proof ids cited directly by `p`.
fn dependencies(lib: &Library, p: &ProofScript) -> Result<BTreeSet<String>, Failure> {
    let mut out = BTreeSet::new();
    if let Some(pairs) = p.method.pairs() {
        for r in pairs.iter().flat_map(|s| [&s.sub, &s.quot]) {
            lib.formula(&r.formula).map_err(Failure::input)?;
            match lib.proof_for(&r.formula) {
                Some(q) => {
                    out.insert(q.id.clone());
                }
                None => {
                    return Err(Failure::refused(format!(
                        "proof {} cites formula {} which has no proof and is not certified",
                        p.id, r.formula
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// Strongly connected components of the citation graph reachable from
/// `root`, dependencies first.
fn plan_groups<'a>(lib: &'a Library, root: &'a ProofScript) -> Result<Vec<Vec<&'a ProofScript>>, Failure> {
    let mut deps: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut todo = vec![root.id.as_str()];
    while let Some(id) = todo.pop() {
        if deps.contains_key(id) {
            continue;
        }
        let p = &lib.proofs[id];
        let d: Vec<String> = dependencies(lib, p)?.into_iter().collect();
        for x in &d {
            todo.push(lib.proofs.get_key_value(x.as_str()).expect("known").0);
        }
        deps.insert(id, d);
    }
    let ids: Vec<&str> = deps.keys().copied().collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let adj: Vec<Vec<usize>> = ids.iter().map(|id| deps[id].iter().map(|d| index[d.as_str()]).collect()).collect();
    Ok(tarjan(&adj).into_iter().map(|c| c.into_iter().map(|k| &lib.proofs[ids[k]]).collect()).collect())
}

/// Tarjan's algorithm; components come out with dependencies first and
/// members sorted.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut St<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on[v] = true;
        for &w in &s.adj[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(i) if s.on[w] => s.low[v] = s.low[v].min(i),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("on stack");
                s.on[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let n = adj.len();
    let mut s = St { adj, index: vec![None; n], low: vec![0; n], on: vec![false; n], stack: Vec::new(), next: 0, out: Vec::new() };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Per-formula induction data.
struct Plan {
    n0: i64,
    base: BTreeSet<i64>,
    /// Start of the inductive step; `None` for a single concrete value.
    step: Option<i64>,
}

fn plan_for(lib: &Library, p: &ProofScript) -> Result<Plan, Failure> {
    let f = lib.formula(&p.target).map_err(Failure::input)?;
    let n0 = f.rep.n0;
    match &p.method {
        Method::One { n } => {
            if *n < n0 {
                return Err(Failure::input(format!("proof {}: n = {n} is below the starting value {n0}", p.id)));
            }
            Ok(Plan { n0, base: [*n].into_iter().collect(), step: None })
        }
        Method::Two { base, .. } => {
            if let Some(b) = base.iter().find(|&&b| b < n0) {
                return Err(Failure::input(format!("proof {}: base case {b} is below the starting value {n0}", p.id)));
            }
            let base: BTreeSet<i64> = base.iter().copied().collect();
            let mut s = n0;
            while base.contains(&s) {
                s += 1;
            }
            Ok(Plan { n0, base, step: Some(s) })
        }
        Method::Three { .. } => Ok(Plan { n0, base: BTreeSet::new(), step: Some(n0) }),
    }
}

fn check_group(
    group: &[&ProofScript],
    plans: &BTreeMap<&str, Plan>,
    registry: &FormulaRegistry,
) -> Vec<Failure> {
    let mut failures = Vec::new();
    let members: BTreeMap<&str, &str> = group.iter().map(|p| (p.target.as_str(), p.id.as_str())).collect();
    let mut zero_edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in group {
        let plan = &plans[p.target.as_str()];
        let (Some(s), Some(pairs)) = (plan.step, p.method.pairs()) else { continue };
        for r in pairs.iter().flat_map(|x| [&x.sub, &x.quot]) {
            let q = r.formula.as_str();
            match (members.get(q), r.shift) {
                (Some(_), Shift::Minus(c)) => {
                    let nq = plans[q].n0;
                    if s - c < nq {
                        failures.push(Failure::refused(format!(
                            "proof {}: base case gap at n = {s}: {r} needs n - {c} >= {nq}",
                            p.id
                        )));
                    }
                }
                (Some(_), Shift::Same) => zero_edges.entry(p.target.as_str()).or_default().push(q),
                (Some(_), Shift::At(k)) => {
                    if !plans[q].base.contains(&k) {
                        failures.push(Failure::refused(format!("proof {}: {r} is not a base case of {q}", p.id)));
                    }
                }
                (None, shift) => {
                    let ok = match shift {
                        Shift::Same => registry.covers_from(q, s),
                        Shift::Minus(c) => registry.covers_from(q, s - c),
                        Shift::At(k) => registry.covers(q, k),
                    };
                    if !ok {
                        failures.push(Failure::refused(format!(
                            "proof {}: cites {r}, which is not certified for the values needed",
                            p.id
                        )));
                    }
                }
            }
        }
    }
    // citations at the same n must be acyclic
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    fn dfs<'a>(v: &'a str, e: &BTreeMap<&'a str, Vec<&'a str>>, st: &mut BTreeMap<&'a str, u8>) -> bool {
        match st.get(v) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        st.insert(v, 1);
        for &w in e.get(v).map(|x| x.as_slice()).unwrap_or(&[]) {
            if dfs(w, e, st) {
                return true;
            }
        }
        st.insert(v, 2);
        false
    }
    let starts: Vec<&str> = zero_edges.keys().copied().collect();
    for v in starts {
        if dfs(v, &zero_edges, &mut state) {
            failures.push(Failure::refused(format!(
                "formula {v} depends on itself at the same parameter value; the induction is not well-founded"
            )));
            break;
        }
    }
    failures
}

fn run_group(lib: &Library, group: &[&ProofScript], opts: &ProveOptions, exec: &dyn Executor, run: &mut ProofRun) -> bool {
    let mut plans = BTreeMap::new();
    for p in group {
        match plan_for(lib, p) {
            Ok(pl) => {
                plans.insert(p.target.as_str(), pl);
            }
            Err(f) => {
                run.failures.push(f);
                return false;
            }
        }
    }
    let names: Vec<&str> = group.iter().map(|p| p.id.as_str()).collect();
    if group.len() > 1 {
        run.trace.steps.push(Step::section(format!("Joint induction over proofs {}", names.join(", "))));
        for p in group {
            let pl = &plans[p.target.as_str()];
            let base: Vec<String> = pl.base.iter().map(|b| b.to_string()).collect();
            run.trace.steps.push(Step::note(format!(
                "Formula {}: starting value {}, base cases {{{}}}, inductive step from n = {}",
                p.target,
                pl.n0,
                base.join(", "),
                pl.step.unwrap_or(pl.n0)
            )));
        }
    }
    let planning = check_group(group, &plans, &run.registry);
    if !planning.is_empty() {
        for f in &planning {
            run.trace.steps.push(Step::check("Well-foundedness", f.message.clone(), false));
        }
        run.failures.extend(planning);
        return false;
    }

    let mut jobs: Vec<Job<'_>> = Vec::new();
    let mut headers: Vec<(usize, Vec<Step>)> = Vec::new();
    for p in group {
        let plan = &plans[p.target.as_str()];
        let formula = lib.formula(&p.target).expect("planned");
        let q = lib.quivers.get(&formula.quiver).expect("resolved");
        headers.push((jobs.len(), proof_header(q, p, &formula.rep, plan)));
        let target = &formula.rep;
        jobs.push(Box::new(move || tree_count_job(target)));
        let delta = match roots::quiver_kind(q) {
            QuiverKind::Tame => roots::radical_delta(q).ok(),
            _ => None,
        };
        for &k in &plan.base {
            let delta = delta.clone();
            jobs.push(Box::new(move || method_one_job(q, target, k, delta.as_ref(), opts.budget)));
        }
        if let (Some(s), Some(pairs)) = (plan.step, p.method.pairs()) {
            for (k, ses) in pairs.iter().enumerate() {
                let id = p.target.as_str();
                jobs.push(Box::new(move || ses_job(lib, q, id, ses, k, s, opts.budget)));
            }
            jobs.push(Box::new(move || hypotheses_job(lib, q, &p.target, pairs, s, opts.order)));
        }
    }
    let outputs = exec.map(jobs);
    let mut failures = Vec::new();
    let mut hi = 0;
    for (k, out) in outputs.into_iter().enumerate() {
        while hi < headers.len() && headers[hi].0 == k {
            run.trace.steps.append(&mut headers[hi].1);
            hi += 1;
        }
        run.trace.steps.extend(out.steps);
        failures.extend(out.failures);
    }
    if !failures.is_empty() {
        run.failures.extend(failures);
        return false;
    }
    for p in group {
        let plan = &plans[p.target.as_str()];
        let rep = &lib.formulas[&p.target].rep;
        let cov = if rep.is_constant() {
            Coverage::From(i64::MIN)
        } else if plan.step.is_none() {
            Coverage::Points(plan.base.clone())
        } else {
            Coverage::From(plan.n0)
        };
        run.registry.certify(&p.target, cov, &p.id);
    }
    true
}

fn proof_header(q: &Quiver, p: &ProofScript, target: &Representation, plan: &Plan) -> Vec<Step> {
    let mut out = vec![Step::section(format!("Proof {} of formula {} (method {})", p.id, p.target, p.method.number()))];
    let mut inputs: Vec<Snapshot> = q
        .arrows()
        .iter()
        .zip(target.matrices())
        .map(|(a, m)| Snapshot::Block { label: format!("{}_{}", p.target, a.id), matrix: m.clone() })
        .collect();
    inputs.push(Snapshot::Dims { label: format!("dim {}", p.target), dims: target.dims().to_vec() });
    let range = match plan.step {
        None => format!("at n = {}", plan.base.iter().next().copied().unwrap_or(plan.n0)),
        Some(_) => format!("for all n >= {}", plan.n0),
    };
    out.push(Step::note(format!("The formula, claimed exceptional {range}.")).with_inputs(inputs));
    out
}

fn tree_count_job(target: &Representation) -> JobOutput {
    let mut out = JobOutput::default();
    match rep::tree_count(target) {
        Ok((ones, len)) => {
            let holds = ones == len - crate::PolyN::constant(1);
            out.steps.push(
                Step::check("Tree count", format!("number of ones {ones} equals length minus one, {len} - 1"), holds)
                    .with_outputs(vec![
                        Snapshot::Poly { label: "ones".into(), value: ones },
                        Snapshot::Poly { label: "length".into(), value: len },
                    ]),
            );
            if !holds {
                out.failures.push(Failure::refused(format!(
                    "{}: {ones} ones but length {len}; not a tree module presentation",
                    target.id
                )));
            }
        }
        Err(e) => out.failures.push(Failure::input(format!("{}: {e}", target.id))),
    }
    out
}

fn method_one_job(q: &Quiver, target: &Representation, k: i64, delta: Option<&DimVector>, budget: u64) -> JobOutput {
    let mut out = JobOutput::default();
    out.steps.push(Step::section(format!("{} at n = {k}: endomorphisms", target.id)));
    let m = match rep::instantiate_formula(q, target, k) {
        Ok(m) => m,
        Err(e) => {
            out.failures.push(Failure::input(format!("{} at n = {k}: {e}", target.id)));
            return out;
        }
    };
    let tree = rep::coefficient_quiver_is_tree(q, &m);
    out.steps.push(Step::check("Coefficient quiver", "the coefficient quiver is a tree", tree));
    if !tree {
        out.failures.push(Failure::refused(format!("{} at n = {k}: coefficient quiver is not a tree", target.id)));
    }
    match prove_end_dim_one(q, &m, delta, budget) {
        Ok(c) => {
            let label = format!("A_{}", target.id);
            out.steps.push(
                Step::note(format!(
                    "The endomorphism system of {} at n = {k} has {} equations in {} unknowns.",
                    target.id,
                    c.matrix.rows(),
                    c.matrix.cols()
                ))
                .with_inputs(vec![Snapshot::Dims { label: "dim".into(), dims: roots::constant_vector(&m.dims) }]),
            );
            match trace::echelon_steps(&label, &c.matrix, &c.cert.ops) {
                Ok(s) if s.is_empty() => out.steps.push(
                    Step::note("The system is already in echelon form.")
                        .with_inputs(vec![Snapshot::Fi { label, matrix: c.matrix.clone() }]),
                ),
                Ok(s) => out.steps.extend(s),
                Err(e) => out.failures.push(Failure::refused(format!("replay failed: {e}"))),
            }
            out.steps.push(Step::check(
                "Corank",
                format!("rank {} in {} unknowns, so dim End = 1 over every field", c.cert.rank, c.matrix.cols()),
                true,
            ));
        }
        Err(e) => {
            out.steps.push(Step::check("Corank", format!("{e}"), false));
            let msg = format!("{} at n = {k}: {e}", target.id);
            out.failures.push(if e.is_budget() { Failure::budget(msg) } else { Failure::refused(msg) });
        }
    }
    out
}

fn morphism_ok(lib: &Library, id: &str, from: &FormulaRef, to: &FormulaRef) -> Result<crate::rep::MorphismFamily, String> {
    let m = lib.morphisms.get(id).ok_or_else(|| format!("unknown morphism {id}"))?;
    if !lib.same_ref(&m.source, from)? || !lib.same_ref(&m.target, to)? {
        return Err(format!("morphism {id} is declared {} -> {}, but the sequence needs {from} -> {to}", m.source, m.target));
    }
    Ok(m.family.clone())
}

fn ses_job(lib: &Library, q: &Quiver, target: &str, ses: &SesRef, k: usize, s: i64, budget: u64) -> JobOutput {
    let mut out = JobOutput::default();
    let label = format!("sequence {} of {target}", k + 1);
    out.steps.push(Step::section(format!(
        "Sequence {}: 0 -> {} -> {target} -> {} -> 0",
        k + 1,
        ses.sub,
        ses.quot
    )));
    let me = FormulaRef::plain(target);
    let resolved = (|| -> Result<_, String> {
        let y = lib.resolve(&ses.sub)?;
        let x = lib.resolve(&ses.quot)?;
        let z = lib.resolve(&me)?;
        let f = morphism_ok(lib, &ses.f, &ses.sub, &me)?;
        let g = morphism_ok(lib, &ses.g, &me, &ses.quot)?;
        Ok((y, z, x, f, g))
    })();
    let (y, z, x, f, g) = match resolved {
        Ok(r) => r,
        Err(e) => {
            out.failures.push(Failure::input(format!("{label}: {e}")));
            return out;
        }
    };
    out.steps.push(Step::note(format!("All identities below are checked for every n >= {s}.")));
    let report = verify_ses(SesInput { quiver: q, sub: &y, mid: &z, quot: &x, f: &f, g: &g, n_min: s, budget });
    out.steps.extend(report.steps);
    out.failures.extend(report.failures.iter().map(|f| f.to_failure(&label)));
    out
}

fn hypotheses_job(
    lib: &Library,
    q: &Quiver,
    target: &str,
    pairs: &[SesRef; 2],
    s: i64,
    order: SchofieldOrder,
) -> JobOutput {
    let mut out = JobOutput::default();
    let dims = (|| -> Result<_, String> {
        let z = lib.resolve(&FormulaRef::plain(target))?.dims().to_vec();
        let mut v = Vec::new();
        for p in pairs {
            v.push((lib.resolve(&p.quot)?.dims().to_vec(), lib.resolve(&p.sub)?.dims().to_vec()));
        }
        Ok((z, v))
    })();
    let (z, v) = match dims {
        Ok(d) => d,
        Err(e) => {
            out.failures.push(Failure::input(e));
            return out;
        }
    };
    let r = verify_two_ses_hypotheses(q, [(&v[0].0, &v[0].1), (&v[1].0, &v[1].1)], &z, order, s);
    out.steps.extend(r.steps);
    for f in &r.failures {
        out.failures.push(Failure::refused(format!("{target}: {}", f.message())));
    }
    out
}
