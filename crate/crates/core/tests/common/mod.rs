//! Plain reference arithmetic over the integers and GF(p).

#![allow(dead_code)]

use qtp_core::FiMatrix;

pub fn int_product(a: &FiMatrix, b: &FiMatrix) -> Vec<i64> {
    let mut out = vec![0i64; a.rows() * b.cols()];
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            for k in 0..a.cols() {
                out[i * b.cols() + j] += i64::from(a.get(i, k)) * i64::from(b.get(k, j));
            }
        }
    }
    out
}

pub fn flat(m: &FiMatrix) -> Vec<i64> {
    m.entries().iter().map(|&v| i64::from(v)).collect()
}

pub fn rank_mod(m: &FiMatrix, p: i64) -> usize {
    let rows: Vec<Vec<i64>> = (0..m.rows()).map(|i| m.row(i).iter().map(|&v| i64::from(v)).collect()).collect();
    rank_rows(&rows, m.cols(), p)
}

/// Rank of integer rows over GF(p).
pub fn rank_rows(m: &[Vec<i64>], cols: usize, p: i64) -> usize {
    let mut a: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|v| v.rem_euclid(p)).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(r) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, r);
        let inv = (1..p).find(|x| x * a[rank][c] % p == 1).unwrap();
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
