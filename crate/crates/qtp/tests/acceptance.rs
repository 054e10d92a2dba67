//! Acceptance run: one line per criterion, tolerances fixed below.
//!
//! `cargo test -p qtp --test acceptance` prints the report; the target fails
//! if any criterion fails. PARTIAL marks a criterion whose checkable parts
//! all passed while one sub-check could not run here (a missing TeX engine).

mod oracle;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use oracle::{Field, Mat};
use qtp::input::{load, parse_document, serialize_document};
use qtp_core::block::{bm_equal_fi, bm_mul, combo_mul, instantiate};
use qtp_core::fi::{diagnose, fi_echelonize, CertifyFailure, FiError};
use qtp_core::knit::{knit_component, ComponentSide};
use qtp_core::rep::{check_tree_count, instantiate_formula, tree_count, MorphismFamily};
use qtp_core::roots::{coxeter_matrix, euler_form, radical_delta, tits_form};
use qtp_core::verify::{prove_end_dim_one, verify_ses, Library, SesCondition, SesInput};
use qtp_core::{Block, BlockMatrix, DimExpr, FiMatrix, PolyN, Quiver, Representation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---- pinned limits ----
const FI_MATRICES: usize = 200;
const FI_MAX_SIDE: usize = 8;
const FI_LIMIT: Duration = Duration::from_secs(10);
const BLOCK_PAIRS: usize = 100;
const BLOCK_N: std::ops::RangeInclusive<i64> = 1..=6;
const EXCHANGE_N: std::ops::RangeInclusive<usize> = 1..=8;
const BLOCK_LIMIT: Duration = Duration::from_secs(10);
const ROOT_PAIRS: usize = 100;
const KNIT_DEPTH: u32 = 10;
const ROOT_LIMIT: Duration = Duration::from_secs(5);
const KRONECKER_N: std::ops::RangeInclusive<i64> = 0..=4;
const KRONECKER_LIMIT: Duration = Duration::from_secs(10);
const MIN_MUTATIONS: usize = 20;
const D4_ORACLE_N: std::ops::RangeInclusive<i64> = 1..=3;
const D4_LIMIT: Duration = Duration::from_secs(60);
const FUZZ_CASES: usize = 10_000;
const PARSER_LIMIT: Duration = Duration::from_secs(60);
const SEED: u64 = 0x5eed;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Partial,
    Fail,
}

type Check = Result<(Status, String), String>;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).expect("corpus file")
}

fn library(name: &str) -> Library {
    load(&read(name)).expect("corpus parses").1
}

fn to_mat(m: &FiMatrix) -> Mat {
    m.to_rows()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_fi(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> FiMatrix {
    let m: Vec<Vec<i64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(density) { if rng.gen_bool(0.5) { 1 } else { -1 } } else { 0 })
                .collect()
        })
        .collect();
    FiMatrix::from_rows(&m, cols).unwrap()
}

// ---- 1 ----

fn field_portability() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut certified, mut tried, mut discrepancies) = (0, 0, 0);
    while certified < FI_MATRICES {
        tried += 1;
        ensure(tried < 50 * FI_MATRICES, || format!("only {certified} of {tried} matrices certified"))?;
        let (r, c) = (rng.gen_range(1..=FI_MAX_SIDE), rng.gen_range(1..=FI_MAX_SIDE));
        let density = rng.gen_range(0.1..0.6);
        let m = random_fi(&mut rng, r, c, density);
        let Ok(cert) = fi_echelonize(&m) else { continue };
        certified += 1;
        let mm = to_mat(&m);
        for f in [Field::Gf(2), Field::Gf(3), Field::Gf(5), Field::Q] {
            if oracle::rank(&mm, f) != cert.rank {
                discrepancies += 1;
            }
        }
    }
    ensure(discrepancies == 0, || format!("{discrepancies} rank discrepancies"))?;
    Ok((Status::Pass, format!("{certified} certified of {tried} random matrices up to {FI_MAX_SIDE}x{FI_MAX_SIDE}, 0 discrepancies")))
}

// ---- 2 ----

fn counterexample() -> Check {
    let m = FiMatrix::from_slices(&[&[1, -1], &[1, 1]]).unwrap();
    match fi_echelonize(&m) {
        Err(FiError::CannotCertify { reason: CertifyFailure::SearchExhausted, diagnostic }) => {
            ensure(diagnostic.gf2 == 1 && diagnostic.rational == 2, || format!("diagnostic {diagnostic}"))?;
            ensure(diagnostic == diagnose(&m), || "diagnostic is not reproducible".into())?;
            let mm = to_mat(&m);
            ensure(oracle::rank_gf(&mm, 2) == 1 && oracle::rank_q(&mm) == 2, || "oracle disagrees".into())?;
            Ok((Status::Pass, format!("CannotCertify; {diagnostic}")))
        }
        other => Err(format!("expected CannotCertify, got {other:?}")),
    }
}

// ---- 3 ----

const SIZES: [DimExpr; 6] =
    [DimExpr::N, DimExpr::ONE, DimExpr::new(0, 2), DimExpr::new(1, 1), DimExpr::new(1, -1), DimExpr::new(2, 0)];
const SYMS: [Block; 5] = [Block::ZERO, Block::I, Block::NEG_I, Block::E, Block::NEG_E];

fn random_parts(rng: &mut ChaCha8Rng) -> Vec<DimExpr> {
    (0..rng.gen_range(1..=3)).map(|_| SIZES[rng.gen_range(0..SIZES.len())]).collect()
}

fn random_block(rng: &mut ChaCha8Rng, rows: &[DimExpr], cols: &[DimExpr]) -> BlockMatrix {
    let mut grid = Vec::new();
    for r in rows {
        for c in cols {
            grid.push(if r == c { SYMS[rng.gen_range(0..SYMS.len())] } else { Block::ZERO });
        }
    }
    BlockMatrix::new(rows.to_vec(), cols.to_vec(), grid).unwrap()
}

/// `diag(E, ..., E)` on a partition.
fn exchange_diag(parts: &[DimExpr]) -> BlockMatrix {
    let cells: Vec<_> = (0..parts.len()).map(|k| (k, k, Block::E)).collect();
    BlockMatrix::from_cells(parts.to_vec(), parts.to_vec(), &cells).unwrap()
}

fn block_homomorphism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut pairs, mut equal_pairs, mut instances) = (0, 0, 0);
    while pairs < BLOCK_PAIRS {
        let (r, m, c) = (random_parts(&mut rng), random_parts(&mut rng), random_parts(&mut rng));
        let (a, b) = (random_block(&mut rng, &r, &m), random_block(&mut rng, &m, &c));
        // a product of stored blocks may need I + E cells; those stay combinations
        let (p, _) = combo_mul(&a.to_combo(), &b.to_combo()).map_err(|e| e.to_string())?;
        let stored = bm_mul(&a, &b).ok();
        pairs += 1;
        for n in BLOCK_N {
            let (ia, ib) = (instantiate(&a, n).unwrap(), instantiate(&b, n).unwrap());
            let want = oracle::mul(&to_mat(&ia), &to_mat(&ib), ia.rows(), ib.cols());
            let (rows, cols, e) = p.instantiate(n).unwrap();
            let got: Mat = (0..rows).map(|i| e[i * cols..(i + 1) * cols].to_vec()).collect();
            ensure(got == want, || format!("product differs at n = {n}: {a:?} {b:?}"))?;
            if let Some(s) = &stored {
                ensure(to_mat(&instantiate(s, n).unwrap()) == want, || format!("bm_mul differs at n = {n}"))?;
            }
            instances += 1;
        }
        // a E E and a random partner with the same partitions
        let d = exchange_diag(&m);
        let aee = bm_mul(&bm_mul(&a, &d).unwrap(), &d).unwrap();
        let other = random_block(&mut rng, &r, &m);
        for (x, y) in [(&a, &aee), (&a, &other)] {
            if bm_equal_fi(x, y).map_err(|e| e.to_string())? {
                equal_pairs += 1;
                for n in BLOCK_N {
                    ensure(instantiate(x, n).unwrap() == instantiate(y, n).unwrap(), || format!("equal blocks differ at n = {n}"))?;
                }
            }
        }
        ensure(bm_equal_fi(&a, &aee).unwrap(), || "a E E is not a".into())?;
    }
    for k in EXCHANGE_N {
        let e = to_mat(&FiMatrix::exchange(k));
        ensure(oracle::mul(&e, &e, k, k) == to_mat(&FiMatrix::identity(k)), || format!("E^2 != I at {k}"))?;
    }
    let e = BlockMatrix::single(DimExpr::N, Block::E);
    let sq = bm_mul(&e, &e).map_err(|x| x.to_string())?;
    ensure(sq == BlockMatrix::single(DimExpr::N, Block::I), || "symbolic E^2 != I".into())?;
    for k in EXCHANGE_N {
        ensure(to_mat(&instantiate(&sq, k as i64).unwrap()) == to_mat(&FiMatrix::identity(k)), || "E^2 instance".into())?;
    }
    Ok((
        Status::Pass,
        format!("{pairs} pairs at n = 1..6 ({instances} instances), {equal_pairs} equal pairs, E^2 = I for n = 1..8"),
    ))
}

// ---- 4 ----

fn arrows(q: &Quiver) -> Vec<(usize, usize)> {
    q.arrows().iter().map(|a| (a.source, a.target)).collect()
}

fn root_identities() -> Check {
    let quivers = [
        qtp_core::quiver::examples::kronecker(),
        qtp_core::quiver::examples::d4_subspace(),
        Quiver::new("D4m", &["c", "1", "2", "3", "4"], &[("a1", "1", "c"), ("a2", "c", "2"), ("a3", "3", "c"), ("a4", "c", "4")])
            .unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut knitted = 0;
    for q in &quivers {
        let (n, ar) = (q.n_vertices(), arrows(q));
        let phi = oracle::coxeter(n, &ar);
        ensure(coxeter_matrix(q).unwrap().to_rows() == phi, || format!("{}: Coxeter matrix differs from the oracle", q.id))?;
        let delta = radical_delta(q).unwrap();
        ensure(oracle::apply(&phi, &delta) == delta.0, || format!("{}: Phi delta != delta", q.id))?;
        ensure(tits_form(q, &delta).unwrap() == 0 && oracle::euler(n, &ar, &delta, &delta) == 0, || format!("{}: q(delta) != 0", q.id))?;
        for _ in 0..ROOT_PAIRS {
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            let b: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
            let lhs = oracle::euler(n, &ar, &a, &b);
            ensure(euler_form(q, &a, &b).unwrap() == lhs, || format!("{}: Euler form differs", q.id))?;
            ensure(lhs == -oracle::euler(n, &ar, &b, &oracle::apply(&phi, &a)), || format!("{}: <a,b> != -<b,Phi a>", q.id))?;
        }
        let inv = oracle::coxeter_inverse(n, &ar);
        let c = oracle::cartan(n, &ar);
        let comp = knit_component(q, ComponentSide::Preprojective, KNIT_DEPTH).unwrap();
        for i in 0..n {
            let mut x: Vec<i64> = c.iter().map(|r| r[i]).collect();
            for s in 0..=KNIT_DEPTH {
                ensure(comp.formal_dim(s, i) == Some(&x[..]), || format!("{}: knitted P({s},{i}) differs", q.id))?;
                knitted += 1;
                x = oracle::apply(&inv, &x);
            }
        }
    }
    Ok((Status::Pass, format!("3 quivers, {ROOT_PAIRS} pairs each, {knitted} knitted vertices up to s = {KNIT_DEPTH}")))
}

// ---- 5 ----

fn kronecker_method_one() -> Check {
    let lib = library("kronecker.qtp");
    let q = &lib.quivers["K"];
    let p = &lib.formula("P")?.rep;
    let (ones, len) = tree_count(p).map_err(|e| e.to_string())?;
    ensure(ones == PolyN::from(DimExpr::new(2, 0)) && len == PolyN::from(DimExpr::new(2, 1)), || format!("ones {ones}, length {len}"))?;
    ensure(check_tree_count(p).unwrap(), || "tree count".into())?;
    let delta = radical_delta(q).unwrap();
    for n in KRONECKER_N {
        let m = instantiate_formula(q, p, n).map_err(|e| e.to_string())?;
        ensure(m.ones() as i64 == 2 * n && m.length() == 2 * n + 1, || format!("n = {n}: counts"))?;
        let cert = prove_end_dim_one(q, &m, Some(&delta), qtp_core::DEFAULT_BACKTRACK_LIMIT).map_err(|e| format!("n = {n}: {e}"))?;
        ensure(cert.cert.corank() == 1, || format!("n = {n}: corank {}", cert.cert.corank()))?;
        let dims: Vec<usize> = m.dims.iter().map(|&d| d as usize).collect();
        let mats: Vec<Mat> = m.mats.iter().map(to_mat).collect();
        for f in [Field::Gf(2), Field::Gf(3)] {
            let d = oracle::end_dim(&arrows(q), &dims, &mats, f);
            ensure(d == 1, || format!("n = {n}: End has dimension {d} over {f:?}"))?;
        }
        if dims.iter().map(|d| d * d).sum::<usize>() <= 20 {
            ensure(oracle::end_count_gf2(&arrows(q), &dims, &mats) == 2, || format!("n = {n}: |End| over GF(2) is not 2"))?;
        }
    }
    Ok((Status::Pass, "n = 0..4: 2n = length - 1, corank 1 certified, End = 1 over GF(2) and GF(3)".into()))
}

// ---- 6 ----

fn cm(rows: usize, cols: usize, entries: &[i64]) -> BlockMatrix {
    let m: Vec<Vec<i64>> = (0..rows).map(|i| entries[i * cols..(i + 1) * cols].to_vec()).collect();
    let f = FiMatrix::from_rows(&m, cols).unwrap();
    // keep the empty dimension on its side
    let (rp, cp) = (vec![DimExpr::ONE; rows], vec![DimExpr::ONE; cols]);
    let rp = if rows == 0 { vec![DimExpr::ZERO] } else { rp };
    let cp = if cols == 0 { vec![DimExpr::ZERO] } else { cp };
    if rows == 0 || cols == 0 {
        return BlockMatrix::zero(rp, cp);
    }
    BlockMatrix::from_fi(&f)
}

/// One A2 sequence in concrete form: arrow matrices of Y, Z, X and the
/// maps of f and g at vertices 1, 2.
#[derive(Clone)]
struct A2Seq {
    y: BlockMatrix,
    z: BlockMatrix,
    x: BlockMatrix,
    f: [BlockMatrix; 2],
    g: [BlockMatrix; 2],
}

impl A2Seq {
    fn check(&self, q: &Quiver) -> Result<Vec<SesCondition>, String> {
        let rep = |m: &BlockMatrix| Representation::new(q, "r", 0, vec![m.clone()], &BTreeMap::new()).map_err(|e| e.to_string());
        let (y, z, x) = (rep(&self.y)?, rep(&self.z)?, rep(&self.x)?);
        let f = MorphismFamily { id: "f".into(), maps: self.f.to_vec() };
        let g = MorphismFamily { id: "g".into(), maps: self.g.to_vec() };
        let r = verify_ses(SesInput { quiver: q, sub: &y, mid: &z, quot: &x, f: &f, g: &g, n_min: 0, budget: 1000 });
        Ok(r.conditions())
    }
}

fn witness_from_corpus() -> Result<(Quiver, A2Seq), String> {
    let lib = library("a2.qtp");
    let q = lib.quivers["A2"].clone();
    let a = |id: &str| lib.formula(id).map(|f| f.rep.matrix(0).clone());
    let maps = |id: &str| {
        let m = &lib.morphisms[id].family.maps;
        [m[0].clone(), m[1].clone()]
    };
    Ok((q, A2Seq { y: a("S2")?, z: a("P1")?, x: a("S1")?, f: maps("f"), g: maps("g") }))
}

fn ses_mutations() -> Check {
    use SesCondition::*;
    let (q, w) = witness_from_corpus()?;
    ensure(w.check(&q)?.is_empty(), || "the A2 witness does not certify".into())?;
    let mut cases: Vec<(String, A2Seq, Vec<SesCondition>)> = Vec::new();
    let mut push = |name: &str, s: A2Seq, want: Vec<SesCondition>| cases.push((name.to_string(), s, want));
    // entries of f and g
    let mut s = w.clone();
    s.f[1] = cm(1, 1, &[0]);
    push("f_2 = 0", s, vec![A]);
    let mut s = w.clone();
    s.g[0] = cm(1, 1, &[0]);
    push("g_1 = 0", s, vec![A]);
    // dimension vectors, changed through the arrow matrix of Y, Z or X
    let dims: [(&str, usize, usize); 10] = [
        ("Y", 1, 1), ("Y", 2, 0), ("Y", 0, 0),
        ("Z", 2, 1), ("Z", 1, 2), ("Z", 0, 1), ("Z", 1, 0),
        ("X", 0, 2), ("X", 0, 0), ("X", 1, 1),
    ];
    for (which, d2, d1) in dims {
        let mut s = w.clone();
        let m = cm(d2, d1, &vec![0; d2 * d1]);
        match which {
            "Y" => s.y = m,
            "Z" => s.z = m,
            _ => s.x = m,
        }
        push(&format!("dim {which} = ({d1}, {d2})"), s, vec![D]);
    }
    // map shapes
    let shapes: [(char, usize, usize, usize); 14] = [
        ('f', 0, 0, 0), ('f', 0, 2, 0), ('f', 0, 1, 1),
        ('f', 1, 0, 1), ('f', 1, 2, 1), ('f', 1, 1, 0), ('f', 1, 1, 2),
        ('g', 0, 0, 1), ('g', 0, 2, 1), ('g', 0, 1, 0), ('g', 0, 1, 2),
        ('g', 1, 1, 1), ('g', 1, 0, 0), ('g', 1, 0, 2),
    ];
    for (which, v, r, c) in shapes {
        let mut s = w.clone();
        let mut e = vec![0; r * c];
        if r > 0 && c > 0 {
            e[0] = 1;
        }
        let m = cm(r, c, &e);
        if which == 'f' {
            s.f[v] = m;
        } else {
            s.g[v] = m;
        }
        push(&format!("{which}_{} is {r}x{c}", v + 1), s, vec![D]);
    }
    // 0 -> P(1) -> P(1) + S(1) -> S(1) -> 0 reaches (b) and (c)
    let split = A2Seq {
        y: cm(1, 1, &[1]),
        z: cm(1, 2, &[1, 0]),
        x: cm(0, 1, &[]),
        f: [cm(2, 1, &[1, 0]), cm(1, 1, &[1])],
        g: [cm(1, 2, &[0, 1]), cm(0, 1, &[])],
    };
    ensure(split.check(&q)?.is_empty(), || "the split sequence does not certify".into())?;
    let variants: [(&str, fn(&mut A2Seq), Vec<SesCondition>); 6] = [
        ("split f_1 = (1, 1)", |s| s.f[0] = cm(2, 1, &[1, 1]), vec![C]),
        ("split f_1 = (0, 1)", |s| s.f[0] = cm(2, 1, &[0, 1]), vec![B, C]),
        ("split f_1 = (1, -1)", |s| s.f[0] = cm(2, 1, &[1, -1]), vec![C]),
        ("split g_1 = (1, 1)", |s| s.g[0] = cm(1, 2, &[1, 1]), vec![C]),
        ("split Z_a = (0, 1)", |s| s.z = cm(1, 2, &[0, 1]), vec![B]),
        ("split f_2 = 0", |s| s.f[1] = cm(1, 1, &[0]), vec![A, B]),
    ];
    for (name, mutate, want) in variants {
        let mut s = split.clone();
        mutate(&mut s);
        push(name, s, want);
    }
    let mut by_condition: BTreeMap<String, usize> = BTreeMap::new();
    for (name, s, want) in &cases {
        let got = s.check(&q)?;
        ensure(&got == want, || format!("{name}: expected {want:?}, got {got:?}"))?;
        for c in want {
            *by_condition.entry(c.to_string()).or_default() += 1;
        }
    }
    ensure(cases.len() >= MIN_MUTATIONS, || format!("only {} mutations", cases.len()))?;
    let summary: Vec<String> = by_condition.iter().map(|(c, k)| format!("{c} x{k}")).collect();
    Ok((Status::Pass, format!("witness certifies; {} mutations fail as expected: {}", cases.len(), summary.join(", "))))
}

// ---- 7 ----

fn qtp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtp"))
}

fn prove_to(dir: &Path, file: &str, proof: &str, jobs: usize, tag: &str) -> Result<(i32, String, String), String> {
    let (tex, json) = (dir.join(format!("{tag}.tex")), dir.join(format!("{tag}.json")));
    let out = qtp()
        .args(["prove", "--input"])
        .arg(corpus(file))
        .args(["--proof", proof, "--jobs", &jobs.to_string(), "--emit-latex"])
        .arg(&tex)
        .arg("--emit-json")
        .arg(&json)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    Ok((code, read(&tex)?, read(&json)?))
}

/// Commands the emitter may use, all from LaTeX itself or amsmath.
const KNOWN: &[&str] = &[
    "documentclass", "usepackage", "setcounter", "allowdisplaybreaks", "begin", "end", "section", "subsection", "item",
    "text", "texttt", "emph", "times", "leftarrow", "xrightarrow", "quad", "qquad", "cdot", "ldots", "cdots", "mathrm",
    "textbf", "le", "ge", "neq", "to", "in", "mid", "par", "noindent", "left", "right", "vdots", "ddots", "hline",
];

/// Structural check: groups and environments nest, math is balanced, only
/// known commands appear, and the text is ASCII.
fn lint_latex(t: &str) -> Result<(), String> {
    ensure(t.is_ascii(), || "non-ASCII output".into())?;
    ensure(t.starts_with("\\documentclass") && t.trim_end().ends_with("\\end{document}"), || "not a complete document".into())?;
    let b = t.as_bytes();
    let (mut depth, mut envs, mut math) = (0i64, Vec::<String>::new(), false);
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'\\' => {
                let j = i + 1;
                let mut k = j;
                while k < b.len() && b[k].is_ascii_alphabetic() {
                    k += 1;
                }
                if k == j {
                    // control symbol
                    match b.get(j) {
                        Some(b'[') => {
                            ensure(!math, || format!("nested display math at byte {i}"))?;
                            math = true;
                        }
                        Some(b']') => {
                            ensure(math, || format!("unopened display math at byte {i}"))?;
                            math = false;
                        }
                        Some(b'\\') | Some(b'_') | Some(b'{') | Some(b'}') | Some(b'$') | Some(b'&') | Some(b'#')
                        | Some(b'%') | Some(b',') | Some(b' ') | Some(b'^') | Some(b'~') => {}
                        other => return Err(format!("unknown control symbol {:?} at byte {i}", other.map(|&c| c as char))),
                    }
                    i = j + 1;
                    continue;
                }
                let name = &t[j..k];
                ensure(KNOWN.contains(&name), || format!("unknown command \\{name}"))?;
                if name == "begin" || name == "end" {
                    let close = t[k..].find('}').ok_or("unterminated environment name")?;
                    let env = t[k + 1..k + close].to_string();
                    if name == "begin" {
                        envs.push(env);
                    } else {
                        let open = envs.pop().ok_or_else(|| format!("\\end{{{env}}} without \\begin"))?;
                        ensure(open == env, || format!("\\begin{{{open}}} closed by \\end{{{env}}}"))?;
                    }
                    i = k + close + 1;
                    continue;
                }
                i = k;
                continue;
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                ensure(depth >= 0, || format!("unbalanced brace at byte {i}"))?;
            }
            b'%' => return Err(format!("stray comment character at byte {i}")),
            b'$' if !math => {}
            _ => {}
        }
        i += 1;
    }
    ensure(depth == 0 && envs.is_empty() && !math, || format!("unclosed: depth {depth}, envs {envs:?}"))
}

fn find_tex_engine() -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join("pdflatex")).find(|p| p.is_file())
}

fn compile_latex(engine: &Path, dir: &Path, tex: &str) -> Result<(), String> {
    let f = dir.join("compile.tex");
    std::fs::write(&f, tex).map_err(|e| e.to_string())?;
    let out = Command::new(engine)
        .args(["-interaction=nonstopmode", "-halt-on-error", "compile.tex"])
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stdout).lines().rev().take(15).collect::<Vec<_>>().join("\n"))
}

/// Over GF(2) and the rationals at small n: f injective, g surjective,
/// both commute with the arrows, g f = 0, and End of the family is 1.
fn d4_oracle(lib: &Library) -> Result<usize, String> {
    let q = &lib.quivers["D4"];
    let ar = arrows(q);
    let mut checks = 0;
    for script in lib.proofs.values() {
        let Some(pairs) = script.method.pairs() else { continue };
        let mid = &lib.formula(&script.target)?.rep;
        for s in pairs {
            let (y, x) = (lib.resolve(&s.sub)?, lib.resolve(&s.quot)?);
            let (f, g) = (&lib.morphisms[&s.f], &lib.morphisms[&s.g]);
            for n in D4_ORACLE_N {
                // the sub family at n - 1 starts later
                let (Ok(yn), Ok(zn), Ok(xn)) =
                    (instantiate_formula(q, &y, n), instantiate_formula(q, mid, n), instantiate_formula(q, &x, n))
                else {
                    continue;
                };
                let fv: Vec<Mat> = f.family.maps.iter().map(|m| to_mat(&instantiate(m, n).unwrap())).collect();
                let gv: Vec<Mat> = g.family.maps.iter().map(|m| to_mat(&instantiate(m, n).unwrap())).collect();
                let (dy, dz, dx) = (&yn.dims, &zn.dims, &xn.dims);
                for fld in [2, 0] {
                    let rk = |m: &Mat| if fld == 0 { oracle::rank_q(m) } else { oracle::rank_gf(m, fld) };
                    for v in 0..q.n_vertices() {
                        ensure(dz[v] == dy[v] + dx[v], || format!("{}: dims at n = {n}", script.id))?;
                        if dy[v] > 0 && dz[v] > 0 {
                            ensure(rk(&fv[v]) == dy[v] as usize, || format!("{}: f not injective at n = {n}", s.f))?;
                        }
                        if dx[v] > 0 && dz[v] > 0 {
                            ensure(rk(&gv[v]) == dx[v] as usize, || format!("{}: g not surjective at n = {n}", s.g))?;
                        }
                        let gf = oracle::mul(&gv[v], &fv[v], dx[v] as usize, dy[v] as usize);
                        ensure(gf.iter().flatten().all(|&e| e == 0), || format!("{}: g f != 0 at n = {n}", script.id))?;
                    }
                }
                for (k, &(a, b)) in ar.iter().enumerate() {
                    let (ym, zm, xm) = (to_mat(&yn.mats[k]), to_mat(&zn.mats[k]), to_mat(&xn.mats[k]));
                    let (zb, za) = (dz[b] as usize, dz[a] as usize);
                    let lhs = oracle::mul(&fv[b], &ym, zb, dy[a] as usize);
                    let rhs = oracle::mul(&zm, &fv[a], zb, dy[a] as usize);
                    ensure(lhs == rhs, || format!("{}: f does not commute at n = {n}", s.f))?;
                    let lhs = oracle::mul(&gv[b], &zm, dx[b] as usize, za);
                    let rhs = oracle::mul(&xm, &gv[a], dx[b] as usize, za);
                    ensure(lhs == rhs, || format!("{}: g does not commute at n = {n}", s.g))?;
                }
                checks += 1;
            }
        }
        for n in D4_ORACLE_N {
            let m = instantiate_formula(q, mid, n).map_err(|e| e.to_string())?;
            let dims: Vec<usize> = m.dims.iter().map(|&d| d as usize).collect();
            let mats: Vec<Mat> = m.mats.iter().map(to_mat).collect();
            for f in [Field::Gf(2), Field::Gf(3), Field::Q] {
                let d = oracle::end_dim(&ar, &dims, &mats, f);
                ensure(d == 1, || format!("{} at n = {n}: End has dimension {d} over {f:?}", script.target))?;
            }
        }
    }
    Ok(checks)
}

fn d4_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let lib = library("d4.qtp");
    let oracle_checks = d4_oracle(&lib)?;
    let mut replayed = oracle::ReplayStats::default();
    let mut texts = Vec::new();
    for proof in ["pA", "pB"] {
        let (code, tex, json) = prove_to(dir.path(), "d4.qtp", proof, 1, proof)?;
        ensure(code == 0, || format!("prove {proof} exited {code}"))?;
        lint_latex(&tex).map_err(|e| format!("{proof}.tex: {e}"))?;
        let v: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        let st = oracle::replay_trace(&v, &[0, 1, 2, 3, 4, 5]).map_err(|e| format!("{proof}.json: {e}"))?;
        replayed.chains += st.chains;
        replayed.ops += st.ops;
        replayed.block_ops += st.block_ops;
        replayed.products += st.products;
        texts.push(tex);
    }
    ensure(replayed.chains > 0 && replayed.products > 0, || "nothing to replay".into())?;
    let what = format!(
        "pA and pB exit 0; GF(2)/Q oracle on {oracle_checks} sequence instances; JSON replays {} echelon chains ({} ops), {} block ops, {} products identically over GF(2) and Q",
        replayed.chains, replayed.ops, replayed.block_ops, replayed.products
    );
    match find_tex_engine() {
        Some(engine) => {
            for t in &texts {
                compile_latex(&engine, dir.path(), t)?;
            }
            Ok((Status::Pass, format!("{what}; LaTeX compiles with {}", engine.display())))
        }
        None => Ok((Status::Partial, format!("{what}; LaTeX structure checked, not compiled: no pdflatex on PATH"))),
    }
}

// ---- 8 ----

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for (file, proof) in [("d4.qtp", "pA"), ("d4.qtp", "pB"), ("kronecker.qtp", "pP"), ("a2.qtp", "pP1")] {
        let base = prove_to(dir.path(), file, proof, 1, "base")?;
        for (jobs, tag) in [(1, "again"), (8, "eight"), (8, "eight2")] {
            let other = prove_to(dir.path(), file, proof, jobs, tag)?;
            ensure(base == other, || format!("{proof}: output differs with --jobs {jobs}"))?;
            runs += 1;
        }
    }
    Ok((Status::Pass, format!("{runs} reruns byte-identical to --jobs 1, including --jobs 8")))
}

// ---- 9 ----

const ALPHABET: &[&str] = &[
    "{", "}", "(", ")", ",", ":", "=", "@", "->", "-", "+", ">=", "n", "2n", "I", "E", "-I", "Z", "block", "matrix", "map", "quiver",
    "vertex", "arrow", "formula", "morphism", "proof", "method1", "method2", "method3", "pair", "sub", "quot", "permuted", "param",
    "rows", "cols", "dim", "at", "base", "0", "1", "7", "99999999", "\n", " ", "#", "$", "é",
];

fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let mut s: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..=4) {
        let at = rng.gen_range(0..=s.len());
        match rng.gen_range(0..6) {
            0 if !s.is_empty() => {
                let end = (at + rng.gen_range(1..12)).min(s.len());
                s.drain(at.min(end)..end);
            }
            1 => {
                let tok = ALPHABET[rng.gen_range(0..ALPHABET.len())];
                s.splice(at..at, tok.chars());
            }
            2 if !s.is_empty() => {
                let k = at.min(s.len() - 1);
                s[k] = ALPHABET[rng.gen_range(0..ALPHABET.len())].chars().next().unwrap();
            }
            3 => s.truncate(at),
            4 if !s.is_empty() => {
                // duplicate a slice, which tends to redeclare things
                let end = (at + rng.gen_range(1..80)).min(s.len());
                let piece: Vec<char> = s[at.min(end)..end].to_vec();
                let to = rng.gen_range(0..=s.len());
                s.splice(to..to, piece);
            }
            _ => {
                let a: String = s.iter().collect();
                let words: Vec<&str> = a.split_whitespace().collect();
                if words.len() > 1 {
                    let (i, j) = (rng.gen_range(0..words.len()), rng.gen_range(0..words.len()));
                    let (wi, wj) = (words[i].to_string(), words[j].to_string());
                    s = a.replacen(&wi, "\u{0}", 1).replacen(&wj, &wi, 1).replacen('\u{0}', &wj, 1).chars().collect();
                }
            }
        }
    }
    s.into_iter().collect()
}

fn parser() -> Check {
    let files = ["a2.qtp", "kronecker.qtp", "d4.qtp"];
    for f in files {
        let text = read(f);
        let doc = parse_document(&text).map_err(|e| format!("{f}: {e}"))?;
        let once = serialize_document(&doc);
        let doc2 = parse_document(&once).map_err(|e| format!("{f} reprinted: {e}"))?;
        ensure(doc2 == doc, || format!("{f}: reparsed document differs"))?;
        ensure(serialize_document(&doc2) == once, || format!("{f}: printing is not a fixpoint"))?;
    }
    let texts: Vec<String> = files.iter().map(|f| read(f)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let (mut rejected, mut accepted) = (0, 0);
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut crash = None;
    for case in 0..FUZZ_CASES {
        let input = mutate(&mut rng, &texts[case % texts.len()]);
        match panic::catch_unwind(|| parse_document(&input)) {
            Err(_) => {
                crash = Some(format!("case {case} panicked on input:\n{input}"));
                break;
            }
            Ok(Ok(doc)) => {
                accepted += 1;
                let again = serialize_document(&doc);
                if parse_document(&again).ok().as_ref() != Some(&doc) {
                    crash = Some(format!("case {case}: accepted input does not round-trip"));
                    break;
                }
            }
            Ok(Err(e)) => {
                rejected += 1;
                let loc = e.loc();
                let lines: Vec<&str> = input.split('\n').collect();
                let ok = loc.line >= 1
                    && (loc.line as usize) <= lines.len()
                    && loc.col >= 1
                    && (loc.col as usize) <= lines[loc.line as usize - 1].chars().count() + 1
                    && e.to_string().starts_with(&format!("{}:{}: ", loc.line, loc.col));
                if !ok {
                    crash = Some(format!("case {case}: badly located error {e}"));
                    break;
                }
            }
        }
    }
    panic::set_hook(hook);
    if let Some(c) = crash {
        return Err(c);
    }
    Ok((
        Status::Pass,
        format!("3 corpus files are fixpoints; {FUZZ_CASES} fuzz cases, {rejected} rejected with located errors, {accepted} accepted and round-tripped, no crashes"),
    ))
}

fn main() {
    let criteria: [(u8, &str, fn() -> Check, Option<Duration>); 9] = [
        (1, "field portability", field_portability, Some(FI_LIMIT)),
        (2, "rank counterexample", counterexample, None),
        (3, "block homomorphism", block_homomorphism, Some(BLOCK_LIMIT)),
        (4, "root identities", root_identities, Some(ROOT_LIMIT)),
        (5, "Kronecker method 1", kronecker_method_one, Some(KRONECKER_LIMIT)),
        (6, "SES mutations", ses_mutations, None),
        (7, "D4 end to end", d4_end_to_end, Some(D4_LIMIT)),
        (8, "determinism", determinism, None),
        (9, "parser", parser, Some(PARSER_LIMIT)),
    ];
    let mut failed = 0;
    for (k, name, run, limit) in criteria {
        let t = Instant::now();
        let r = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let dt = t.elapsed();
        let (status, detail) = match r {
            Ok((s, d)) => match limit {
                Some(l) if dt > l => (Status::Fail, format!("{d}; took longer than {} s", l.as_secs())),
                _ => (s, d),
            },
            Err(e) => (Status::Fail, e),
        };
        let word = match status {
            Status::Pass => "PASS",
            Status::Partial => "PARTIAL",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
        };
        let bound = limit.map(|l| format!(", limit {} s", l.as_secs())).unwrap_or_default();
        println!("criterion {k} {name}: {word} ({detail}; {:.2} s{bound})", dt.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
