//! Helpers and independent numerical oracles for the integration tests.
#![allow(dead_code)]

use logshrink::SymmetricMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

/// Orthogonal matrix by modified Gram-Schmidt on a Gaussian matrix.
pub fn orthogonal(q: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    let mut m = normal_matrix(q, q, rng);
    for j in 0..q {
        for k in 0..j {
            let dot: f64 = (0..q).map(|i| m[[i, j]] * m[[i, k]]).sum();
            for i in 0..q {
                m[[i, j]] -= dot * m[[i, k]];
            }
        }
        let norm = (0..q).map(|i| m[[i, j]] * m[[i, j]]).sum::<f64>().sqrt();
        for i in 0..q {
            m[[i, j]] /= norm;
        }
    }
    m
}

/// `H diag(λ) Hᵀ` with `log λ` uniform in `[−spread, spread]`.
pub fn spd_with_spread(q: usize, spread: f64, rng: &mut ChaCha20Rng) -> SymmetricMatrix {
    let h = orthogonal(q, rng);
    let lam: Vec<f64> = (0..q).map(|_| rng.random_range(-spread..=spread).exp()).collect();
    let m = Array2::from_shape_fn((q, q), |(i, j)| (0..q).map(|k| h[[i, k]] * lam[k] * h[[j, k]]).sum());
    SymmetricMatrix::new(symmetrize(m)).unwrap()
}

pub fn spd(q: usize, seed: u64) -> SymmetricMatrix {
    spd_with_spread(q, 2.0, &mut rng(seed))
}

/// Wishart-type sample covariance `XᵀX / n` of `n` standard normal rows.
pub fn wishart(q: usize, n: usize, seed: u64) -> SymmetricMatrix {
    let x = normal_matrix(n, q, &mut rng(seed));
    SymmetricMatrix::new(symmetrize(x.t().dot(&x) / n as f64)).unwrap()
}

pub fn symmetrize(m: Array2<f64>) -> Array2<f64> {
    (&m + &m.t()) / 2.0
}

pub fn fro(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn fro_diff(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    fro(&(a.as_array() - b.as_array()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// LU with partial pivoting: returns (LU, permutation sign) or `None` if singular.
fn lu(a: &Array2<f64>) -> Option<(Array2<f64>, Vec<usize>, f64)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[[i, k]].abs().total_cmp(&m[[j, k]].abs()))?;
        if m[[p, k]] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap([p, j], [k, j]);
            }
            perm.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let f = m[[i, k]] / m[[k, k]];
            m[[i, k]] = f;
            for j in k + 1..n {
                m[[i, j]] -= f * m[[k, j]];
            }
        }
    }
    Some((m, perm, sign))
}

/// Solves `A X = B` column by column.
pub fn solve(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let (m, perm, _) = lu(a).expect("nonsingular");
    let mut x = Array2::zeros(b.raw_dim());
    for c in 0..b.ncols() {
        let mut y: Vec<f64> = perm.iter().map(|&p| b[[p, c]]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= m[[i, j]] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= m[[i, j]] * y[j];
            }
            y[i] /= m[[i, i]];
        }
        for i in 0..n {
            x[[i, c]] = y[i];
        }
    }
    x
}

pub fn solve_vec(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let bm = Array2::from_shape_vec((b.len(), 1), b.to_vec()).unwrap();
    solve(a, &bm).column(0).to_vec()
}

/// `log det A` for positive definite `A` via LU.
pub fn log_det(a: &Array2<f64>) -> f64 {
    let (m, _, sign) = lu(a).expect("nonsingular");
    assert!(sign * (0..a.nrows()).map(|i| m[[i, i]].signum()).product::<f64>() > 0.0);
    (0..a.nrows()).map(|i| m[[i, i]].abs().ln()).sum()
}

/// Gaussian loss `tr(Σ⁻¹S) + log det Σ` by direct linear algebra.
pub fn gauss_loss_oracle(sigma: &Array2<f64>, s: &Array2<f64>) -> f64 {
    let x = solve(sigma, s);
    (0..s.nrows()).map(|i| x[[i, i]]).sum::<f64>() + log_det(sigma)
}

/// Root of a strictly increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Descending positive eigenvalue-like vectors.
pub fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
