//! Reference computations that share no code with `qtp-core`: plain
//! Gaussian elimination over GF(p) and over the rationals, the endomorphism
//! equations written out from scratch, path counting, and a trace replayer
//! that reads the JSON directly.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

pub type Mat = Vec<Vec<i64>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Gf(i64),
    Q,
}

fn q(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rank_gf(m: &Mat, p: i64) -> usize {
    let mut a: Mat = m.iter().map(|r| r.iter().map(|v| v.rem_euclid(p)).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = (1..p).find(|x| x * a[rank][c] % p == 1).expect("p is prime");
        for r in 0..a.len() {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % p;
                for k in 0..cols {
                    a[r][k] = (a[r][k] - f * a[rank][k]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank_q(m: &Mat) -> usize {
    let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    rank_q_in_place(&mut a)
}

fn rank_q_in_place(a: &mut [Vec<BigRational>]) -> usize {
    let zero = q(0);
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != zero) else { continue };
        a.swap(rank, piv);
        for r in 0..a.len() {
            if r != rank && a[r][c] != zero {
                let f = &a[r][c] / &a[rank][c];
                for k in 0..cols {
                    let d = &f * &a[rank][k];
                    a[r][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank(m: &Mat, field: Field) -> usize {
    match field {
        Field::Gf(p) => rank_gf(m, p),
        Field::Q => rank_q(m),
    }
}

/// `dim End(M)`: unknowns are the entries of each `φ_v`, one equation per
/// entry of `φ_t M_α − M_α φ_s` for each arrow `α: s -> t`.
pub fn end_dim(arrows: &[(usize, usize)], dims: &[usize], mats: &[Mat], field: Field) -> usize {
    let mut base = vec![0; dims.len()];
    let mut unknowns = 0;
    for v in 0..dims.len() {
        base[v] = unknowns;
        unknowns += dims[v] * dims[v];
    }
    // φ_v[r][c] is unknown base[v] + r * dims[v] + c
    let mut eqs: Mat = Vec::new();
    for (&(s, t), m) in arrows.iter().zip(mats) {
        for r in 0..dims[t] {
            for c in 0..dims[s] {
                let mut row = vec![0i64; unknowns];
                for k in 0..dims[t] {
                    row[base[t] + r * dims[t] + k] += m[k][c];
                }
                for k in 0..dims[s] {
                    row[base[s] + k * dims[s] + c] -= m[r][k];
                }
                eqs.push(row);
            }
        }
    }
    if eqs.is_empty() {
        return unknowns;
    }
    unknowns - rank(&eqs, field)
}

/// Counts `End(M)` over GF(2) by trying every tuple of maps. Only for
/// tiny dimension vectors.
pub fn end_count_gf2(arrows: &[(usize, usize)], dims: &[usize], mats: &[Mat]) -> u64 {
    let bits: usize = dims.iter().map(|d| d * d).sum();
    assert!(bits <= 20, "too large to enumerate");
    let mut count = 0;
    for mask in 0u64..(1 << bits) {
        let mut phi = Vec::new();
        let mut k = 0;
        for &d in dims {
            let mut f = vec![vec![0i64; d]; d];
            for row in f.iter_mut() {
                for x in row.iter_mut() {
                    *x = ((mask >> k) & 1) as i64;
                    k += 1;
                }
            }
            phi.push(f);
        }
        let ok = arrows.iter().zip(mats).all(|(&(s, t), m)| {
            let lhs = mul(&phi[t], m, dims[t], dims[s]);
            let rhs = mul(m, &phi[s], dims[t], dims[s]);
            lhs.iter().flatten().zip(rhs.iter().flatten()).all(|(a, b)| (a - b).rem_euclid(2) == 0)
        });
        count += u64::from(ok);
    }
    count
}

/// Product with explicit outer shape, so empty factors still work.
pub fn mul(a: &Mat, b: &Mat, rows: usize, cols: usize) -> Mat {
    let inner = a.first().map_or(b.len(), Vec::len);
    let mut out = vec![vec![0i64; cols]; rows];
    for i in 0..rows {
        for j in 0..cols {
            for k in 0..inner {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `C[i][j]` = number of paths `j -> i`, by depth-first enumeration.
pub fn cartan(n: usize, arrows: &[(usize, usize)]) -> Mat {
    fn walk(v: usize, arrows: &[(usize, usize)], count: &mut [i64]) {
        count[v] += 1;
        for &(s, t) in arrows {
            if s == v {
                walk(t, arrows, count);
            }
        }
    }
    let mut c = vec![vec![0i64; n]; n];
    for j in 0..n {
        let mut count = vec![0i64; n];
        walk(j, arrows, &mut count);
        for i in 0..n {
            c[i][j] = count[i];
        }
    }
    c
}

pub fn inverse(m: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let zero = q(0);
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().cloned().chain((0..n).map(|j| q(i64::from(i == j)))).collect())
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| a[r][c] != zero).expect("invertible");
        a.swap(c, piv);
        let p = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x /= p.clone();
        }
        for r in 0..n {
            if r != c && a[r][c] != zero {
                let f = a[r][c].clone();
                for k in 0..2 * n {
                    let d = &f * &a[c][k];
                    a[r][k] -= d;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn to_int(m: Vec<Vec<BigRational>>) -> Mat {
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "non-integral entry {x}");
                    i64::try_from(x.to_integer()).expect("small")
                })
                .collect()
        })
        .collect()
}

/// `Φ = −Cᵗ C⁻¹` with the inverse taken over the rationals.
pub fn coxeter(n: usize, arrows: &[(usize, usize)]) -> Mat {
    let c = cartan(n, arrows);
    let cq: Vec<Vec<BigRational>> = c.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    let ci = inverse(&cq);
    let mut out = vec![vec![q(0); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] -= q(c[k][i]) * &ci[k][j];
            }
        }
    }
    to_int(out)
}

pub fn coxeter_inverse(n: usize, arrows: &[(usize, usize)]) -> Mat {
    let phi = coxeter(n, arrows);
    let pq: Vec<Vec<BigRational>> = phi.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    to_int(inverse(&pq))
}

pub fn apply(m: &Mat, x: &[i64]) -> Vec<i64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// `⟨x,y⟩ = xᵗ C⁻ᵗ y`, computed with the rational inverse.
pub fn euler(n: usize, arrows: &[(usize, usize)], x: &[i64], y: &[i64]) -> i64 {
    let c = cartan(n, arrows);
    let cq: Vec<Vec<BigRational>> = c.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    let ci = inverse(&cq);
    let mut acc = q(0);
    for i in 0..n {
        for j in 0..n {
            // (C⁻ᵗ)[i][j] = C⁻¹[j][i]
            acc += q(x[i]) * &ci[j][i] * q(y[j]);
        }
    }
    assert!(acc.is_integer());
    i64::try_from(acc.to_integer()).unwrap()
}

// ---- trace replay ----

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ReplayStats {
    pub chains: usize,
    pub ops: usize,
    pub block_ops: usize,
    pub products: usize,
}

fn dim(v: &Value) -> (i64, i64) {
    let a = v.as_array().expect("dim pair");
    (a[0].as_i64().unwrap(), a[1].as_i64().unwrap())
}

fn at(d: (i64, i64), n: i64) -> Option<usize> {
    usize::try_from(d.0 * n + d.1).ok()
}

fn fi_matrix(v: &Value) -> Mat {
    v["entries"].as_array().unwrap().iter().map(|r| r.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect()).collect()
}

fn square(sym_i: i64, sym_e: i64, k: usize) -> Mat {
    let mut m = vec![vec![0i64; k]; k];
    for i in 0..k {
        m[i][i] += sym_i;
        m[i][k - 1 - i] += sym_e;
    }
    m
}

/// Instantiates a partitioned matrix whose cells are `ci·I + ce·E`.
fn assemble(rows: &[(i64, i64)], cols: &[(i64, i64)], cell: impl Fn(usize, usize) -> (i64, i64), n: i64) -> Option<Mat> {
    let rs: Vec<usize> = rows.iter().map(|&d| at(d, n)).collect::<Option<_>>()?;
    let cs: Vec<usize> = cols.iter().map(|&d| at(d, n)).collect::<Option<_>>()?;
    let mut m = vec![vec![0i64; cs.iter().sum()]; rs.iter().sum()];
    let mut r0 = 0;
    for (i, &r) in rs.iter().enumerate() {
        let mut c0 = 0;
        for (j, &c) in cs.iter().enumerate() {
            let (ci, ce) = cell(i, j);
            if ci != 0 || ce != 0 {
                assert_eq!(r, c, "symbol on a non-square cell");
                let b = square(ci, ce, r);
                for x in 0..r {
                    for y in 0..c {
                        m[r0 + x][c0 + y] = b[x][y];
                    }
                }
            }
            c0 += c;
        }
        r0 += r;
    }
    Some(m)
}

fn block_matrix(v: &Value, n: i64) -> Option<Mat> {
    let rows: Vec<_> = v["row_partition"].as_array().unwrap().iter().map(dim).collect();
    let cols: Vec<_> = v["col_partition"].as_array().unwrap().iter().map(dim).collect();
    let grid = v["grid"].as_array().unwrap();
    assemble(
        &rows,
        &cols,
        |i, j| {
            let c = &grid[i][j];
            let s = c["sign"].as_i64().unwrap();
            match c["sym"].as_str().unwrap() {
                "Z" => (0, 0),
                "I" => (s, 0),
                "E" => (0, s),
                x => panic!("unknown block {x}"),
            }
        },
        n,
    )
}

fn combo_matrix(v: &Value, n: i64) -> Option<Mat> {
    let rows: Vec<_> = v["rows"].as_array().unwrap().iter().map(dim).collect();
    let cols: Vec<_> = v["cols"].as_array().unwrap().iter().map(dim).collect();
    let grid = v["grid"].as_array().unwrap();
    let w = cols.len();
    assemble(&rows, &cols, |i, j| (grid[i * w + j]["ci"].as_i64().unwrap(), grid[i * w + j]["ce"].as_i64().unwrap()), n)
}

/// A concrete instance of a snapshot, if it has one at `n`.
fn snapshot(s: &Value, n: i64) -> Option<Mat> {
    match s["type"].as_str().unwrap() {
        "fi" => Some(fi_matrix(&s["matrix"])),
        "block" => block_matrix(&s["matrix"], n),
        "combo" => combo_matrix(&s["matrix"], n),
        "int" => {
            let (r, c) = (s["rows"].as_u64().unwrap() as usize, s["cols"].as_u64().unwrap() as usize);
            let e: Vec<i64> = s["entries"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
            Some((0..r).map(|i| e[i * c..(i + 1) * c].to_vec()).collect())
        }
        _ => None,
    }
}

/// Matrix over the rationals and over GF(2), transformed in lockstep.
struct Twin {
    q: Vec<Vec<BigRational>>,
    f2: Mat,
}

impl Twin {
    fn new(m: &Mat) -> Twin {
        Twin { q: m.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect(), f2: m.iter().map(|r| r.iter().map(|v| v.rem_euclid(2)).collect()).collect() }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        self.q.swap(i, j);
        self.f2.swap(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in 0..self.q.len() {
            self.q[r].swap(i, j);
            self.f2[r].swap(i, j);
        }
    }

    fn add_row(&mut self, t: usize, s: usize, k: i64) {
        for c in 0..self.q[t].len() {
            let d = &self.q[s][c] * q(k);
            self.q[t][c] += d;
            self.f2[t][c] = (self.f2[t][c] + k * self.f2[s][c]).rem_euclid(2);
        }
    }

    fn add_col(&mut self, t: usize, s: usize, k: i64) {
        for r in 0..self.q.len() {
            let d = &self.q[r][s] * q(k);
            self.q[r][t] += d;
            self.f2[r][t] = (self.f2[r][t] + k * self.f2[r][s]).rem_euclid(2);
        }
    }

    /// Both fields hold the reduction of the same integer matrix `m`.
    fn agrees(&self, m: &Mat) -> bool {
        self.q.len() == m.len()
            && self.q.iter().zip(m).all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, &y)| *x == q(y)))
            && self.f2.iter().zip(m).all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| x == y.rem_euclid(2)))
    }

    fn ranks(&self) -> (usize, usize) {
        let mut a = self.q.clone();
        (rank_q_in_place(&mut a), rank_gf(&self.f2, 2))
    }
}

/// Sizes `(offset, size)` of each block at `n`.
fn spans(part: &Value, n: i64) -> Option<Vec<(usize, usize)>> {
    let mut off = 0;
    let mut out = Vec::new();
    for d in part.as_array().unwrap() {
        let k = at(dim(d), n)?;
        out.push((off, k));
        off += k;
    }
    Some(out)
}

/// Replays every logged operation over the rationals and GF(2) and checks
/// each recorded matrix. Block operations and products are checked at
/// every `n` in `ns` where all sizes are nonnegative.
pub fn replay_trace(trace: &Value, ns: &[i64]) -> Result<ReplayStats, String> {
    let steps = trace["steps"].as_array().ok_or("no steps")?;
    let mut stats = ReplayStats::default();
    let mut fi: Option<(String, Twin)> = None;
    let mut blocks: Vec<Option<(String, Twin, Value)>> = Vec::new();
    let finish_fi = |fi: &mut Option<(String, Twin)>, stats: &mut ReplayStats| -> Result<(), String> {
        if let Some((label, t)) = fi.take() {
            let (rq, r2) = t.ranks();
            if rq != r2 {
                return Err(format!("{label}: final rank {rq} over Q but {r2} over GF(2)"));
            }
            stats.chains += 1;
        }
        Ok(())
    };
    for (k, s) in steps.iter().enumerate() {
        let kind = s["kind"].as_str().unwrap_or("");
        let op = &s["operation"];
        let here = |m: &str| format!("step {k} ({}): {m}", s["caption"].as_str().unwrap_or(""));
        if kind != "echelon" {
            finish_fi(&mut fi, &mut stats)?;
        }
        if kind != "block-echelon" {
            blocks.clear();
        }
        match kind {
            "echelon" => {
                if let Some(input) = s["inputs"].as_array().and_then(|v| v.first()) {
                    finish_fi(&mut fi, &mut stats)?;
                    fi = Some((input["label"].as_str().unwrap().to_string(), Twin::new(&fi_matrix(&input["matrix"]))));
                }
                let (_, t) = fi.as_mut().ok_or_else(|| here("operation without an input"))?;
                let o = &op["op"]["kind"];
                let u = |f: &str| o[f].as_u64().unwrap() as usize;
                match o["op"].as_str().unwrap() {
                    "swap-rows" => t.swap_rows(u("i"), u("j")),
                    "swap-cols" => t.swap_cols(u("i"), u("j")),
                    "add-row" => t.add_row(u("target"), u("source"), o["sign"].as_i64().unwrap()),
                    "add-col" => t.add_col(u("target"), u("source"), o["sign"].as_i64().unwrap()),
                    x => return Err(here(&format!("unknown operation {x}"))),
                }
                stats.ops += 1;
                let out = fi_matrix(&s["outputs"][0]["matrix"]);
                if !t.agrees(&out) {
                    return Err(here("replayed matrix differs from the recorded one"));
                }
            }
            "block-echelon" => {
                if let Some(input) = s["inputs"].as_array().and_then(|v| v.first()) {
                    blocks = ns
                        .iter()
                        .map(|&n| {
                            block_matrix(&input["matrix"], n).map(|m| (input["label"].to_string(), Twin::new(&m), input["matrix"].clone()))
                        })
                        .collect();
                }
                let o = &op["op"];
                let (t, src) = (o["target"].as_u64().unwrap() as usize, o["source"].as_u64().unwrap() as usize);
                let coef = &o["coef"];
                let sign = coef["sign"].as_i64().unwrap();
                let exch = coef["sym"].as_str().unwrap() == "E";
                for (slot, &n) in blocks.iter_mut().zip(ns) {
                    let Some((_, twin, before)) = slot.as_mut() else { continue };
                    let rows = o["op"].as_str().unwrap() == "add-row";
                    let part = if rows { &before["row_partition"] } else { &before["col_partition"] };
                    let sp = spans(part, n).ok_or_else(|| here("negative size"))?;
                    let ((to, tk), (so, sk)) = (sp[t], sp[src]);
                    if tk != sk {
                        return Err(here("blocks of different sizes"));
                    }
                    for x in 0..tk {
                        let y = if exch { tk - 1 - x } else { x };
                        if rows {
                            twin.add_row(to + x, so + y, sign);
                        } else {
                            // C_t <- C_t + C_s E: column x of C_s E is column k-1-x of C_s
                            twin.add_col(to + x, so + y, sign);
                        }
                    }
                    let after = &s["outputs"][0]["matrix"];
                    let want = block_matrix(after, n).ok_or_else(|| here("negative size"))?;
                    if !twin.agrees(&want) {
                        return Err(here(&format!("block operation replays differently at n = {n}")));
                    }
                    *before = after.clone();
                }
                stats.block_ops += 1;
            }
            "product" => {
                let ins = s["inputs"].as_array().unwrap();
                let mut checked = false;
                for &n in ns {
                    let (Some(a), Some(b), Some(p)) = (snapshot(&ins[0], n), snapshot(&ins[1], n), snapshot(&s["outputs"][0], n))
                    else {
                        continue;
                    };
                    if a.first().map_or(b.len(), Vec::len) != b.len() || a.len() != p.len() {
                        return Err(here("shapes do not match"));
                    }
                    let got = mul(&a, &b, p.len(), p.first().map_or(0, Vec::len));
                    if got != p {
                        return Err(here(&format!("product differs at n = {n}")));
                    }
                    checked = true;
                    if ins[0]["type"] == "fi" {
                        break;
                    }
                }
                if !checked {
                    return Err(here("no admissible n to check the product at"));
                }
                stats.products += 1;
            }
            _ => {}
        }
    }
    finish_fi(&mut fi, &mut stats)?;
    Ok(stats)
}
