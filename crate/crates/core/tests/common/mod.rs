//! Independent oracles and random inputs shared by the integration tests.
//! Nothing here calls into the SVD, NNLS or double-description code.
#![allow(dead_code)]

use gramcone::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, lo: f64, hi: f64) -> Matrix {
    let data = (0..m * n).map(|_| rng.gen_range(lo..hi)).collect();
    Matrix::from_row_major(m, n, data).unwrap()
}

/// `m × n` matrix of rank at most `r`, as a product of two uniform factors.
pub fn low_rank(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> Matrix {
    let a = uniform_matrix(rng, m, r, -1.0, 1.0);
    let b = uniform_matrix(rng, r, n, -1.0, 1.0);
    a.matmul(&b)
}

/// Random shape with `m, n ≤ max` and a random target rank.
pub fn random_shape(rng: &mut ChaCha8Rng, max: usize) -> (usize, usize, usize) {
    let m = rng.gen_range(1..=max);
    let n = rng.gen_range(1..=max);
    let r = rng.gen_range(0..=m.min(n));
    (m, n, r)
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gaussian elimination with partial pivoting. `None` if a pivot falls
/// below `1e-12` relative to the largest entry.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut row = r.clone();
            row.push(bi);
            row
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            let pivot = m[k].clone();
            for (x, q) in m[i][k..].iter_mut().zip(&pivot[k..]) {
                *x -= f * q;
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    Some(x)
}

/// Rank by Gaussian elimination with full pivoting and an absolute cutoff.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let (nr, nc) = (m.len(), m.first().map_or(0, |r| r.len()));
    let mut r = 0;
    let mut used = vec![false; nc];
    for _ in 0..nr.min(nc) {
        let mut best = (0, 0, 0.0);
        for (i, row) in m.iter().enumerate().skip(r) {
            for (j, &v) in row.iter().enumerate() {
                if !used[j] && v.abs() > best.2 {
                    best = (i, j, v.abs());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pi, pj, _) = best;
        m.swap(r, pi);
        used[pj] = true;
        for i in r + 1..nr {
            let f = m[i][pj] / m[r][pj];
            let pivot = m[r].clone();
            for (x, q) in m[i].iter_mut().zip(&pivot) {
                *x -= f * q;
            }
        }
        r += 1;
    }
    r
}

/// Exact nonnegative least squares by enumerating supports: the optimum is
/// the unconstrained least-squares fit on its own support.
pub fn nnls_oracle(gens: &[Vec<f64>], x: &[f64]) -> f64 {
    let k = gens.len();
    let mut best = norm(x);
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let normal: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| dot(&gens[i], &gens[j])).collect())
            .collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| dot(&gens[i], x)).collect();
        let Some(c) = solve(&normal, &rhs) else { continue };
        if c.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut r = x.to_vec();
        for (&i, &ci) in idx.iter().zip(&c) {
            for (rj, gj) in r.iter_mut().zip(&gens[i]) {
                *rj -= ci * gj;
            }
        }
        best = best.min(norm(&r));
    }
    best
}

/// Nonnegative combination of the columns of `g`; each coefficient is zero
/// with probability one half so that faces are sampled too.
pub fn cone_point(rng: &mut ChaCha8Rng, g: &Matrix) -> Vec<f64> {
    let mut x = vec![0.0; g.rows()];
    for c in g.columns() {
        if rng.gen_bool(0.5) {
            let w: f64 = rng.gen_range(0.0..1.0);
            for (xi, ci) in x.iter_mut().zip(&c) {
                *xi += w * ci;
            }
        }
    }
    x
}

/// Orthonormalises the columns of `a` by modified Gram-Schmidt, run twice.
pub fn orthonormal_columns(a: &Matrix) -> Matrix {
    let mut cols = a.columns();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let c = dot(&cols[i], &cols[j]);
                let qi = cols[i].clone();
                for (x, q) in cols[j].iter_mut().zip(&qi) {
                    *x -= c * q;
                }
            }
        }
        let nj = norm(&cols[j]);
        cols[j].iter_mut().for_each(|x| *x /= nj);
    }
    Matrix::from_columns(a.rows(), &cols).unwrap()
}

/// `U diag(σ) Vᵀ` of rank `r` with random orthonormal `U`, `V` and `σ`
/// log-uniform in `[0.2, 5]`, so the condition number stays below 25.
pub fn conditioned(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> Matrix {
    let u = orthonormal_columns(&uniform_matrix(rng, m, r, -1.0, 1.0));
    let v = orthonormal_columns(&uniform_matrix(rng, n, r, -1.0, 1.0));
    let sigma: Vec<f64> = (0..r).map(|_| rng.gen_range(0.2f64.ln()..5f64.ln()).exp()).collect();
    u.matmul(&Matrix::from_diag(&sigma)).matmul(&v.transpose())
}
