//! Dense symmetric linear algebra.
//!
//! Everything here works on small dense matrices (q up to a few hundred).
//! The eigensolver is a cyclic Jacobi iteration: slower than tridiagonal QL
//! but deterministic and accurate to high relative precision for small
//! eigenvalues, which matters when exponentiating spectra that span several
//! orders of magnitude.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An eigenvalue is treated as zero when it is at most this fraction of
/// `max(1, largest eigenvalue)`.
pub const PD_RELATIVE_TOL: f64 = 1e-12;

/// Smallest eigenvalue accepted by the matrix logarithm and its relatives.
pub const LOG_EIGEN_FLOOR: f64 = 1e-300;

const SYMMETRY_TOL: f64 = 1e-8;

/// Threshold below which an eigenvalue of a matrix with largest eigenvalue
/// `lambda_max` counts as zero.
pub fn zero_eigen_threshold(lambda_max: f64) -> f64 {
    PD_RELATIVE_TOL * lambda_max.max(1.0)
}

/// Dense real symmetric matrix. Entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix {
    data: Array2<f64>,
}

impl SymmetricMatrix {
    /// Validates a square, finite, (numerically) symmetric array and makes it
    /// exactly symmetric by averaging mirrored entries.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r == 0 {
            return Err(Error::InvalidInput("matrix must have dimension >= 1".into()));
        }
        if r != c {
            return Err(Error::InvalidInput(format!("matrix is {r}x{c}, not square")));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let scale = data.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..r {
            for j in (i + 1)..r {
                if (data[[i, j]] - data[[j, i]]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        data[[i, j]],
                        data[[j, i]]
                    )));
                }
            }
        }
        Ok(Self::symmetrized(data))
    }

    /// Averages mirrored entries without validation. Used for results of
    /// products that are symmetric up to rounding.
    pub(crate) fn symmetrized(mut data: Array2<f64>) -> Self {
        let n = data.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (data[[i, j]] + data[[j, i]]);
                data[[i, j]] = m;
                data[[j, i]] = m;
            }
        }
        Self { data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows must all have length equal to the row count".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((n, n), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(data)
    }

    /// Builds a matrix from the upper triangle; `f(i, j)` is called for `i <= j`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut data = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[[i, j]] = v;
                data[[j, i]] = v;
            }
        }
        Self { data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| 0.0)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        self.data.diag().to_vec()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: &self.data * c }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { data: &self.data - &other.data })
    }

    /// Plain matrix product (not symmetric in general).
    pub fn matmul(&self, other: &Self) -> Array2<f64> {
        self.data.dot(&other.data)
    }

    /// `H M Hᵀ` for a square `H` of matching order.
    pub fn congruence(&self, h: &Array2<f64>) -> Self {
        Self::symmetrized(h.dot(&self.data).dot(&h.t()))
    }

    /// `v̄ᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.data
            .rows()
            .into_iter()
            .zip(v)
            .map(|(row, vi)| vi * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.data[[i, j]] * v[j]).sum())
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(m: SymmetricMatrix) -> Self {
        m.to_rows()
    }
}

/// `P diag(values) Pᵀ`, with eigenvectors stored in the columns of `vectors`.
pub fn compose(vectors: &Array2<f64>, values: &[f64]) -> SymmetricMatrix {
    let mut scaled = vectors.clone();
    for (mut col, &v) in scaled.columns_mut().into_iter().zip(values) {
        col *= v;
    }
    SymmetricMatrix::symmetrized(scaled.dot(&vectors.t()))
}

/// Orthonormal eigenvectors (columns) with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    vectors: Array2<f64>,
    values: Array1<f64>,
}

impl SpectralDecomposition {
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        compose(&self.vectors, self.values.as_slice().expect("contiguous"))
    }

    /// `P diag(f(λ)) Pᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        compose(&self.vectors, &mapped)
    }

    fn require_positive(&self, floor: f64) -> Result<()> {
        let min = self.smallest();
        if !(min > floor) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(())
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back sorted descending (stable on ties, so ties keep the
/// order in which Jacobi produced them). Each eigenvector is signed so that
/// its largest-magnitude component is positive.
pub fn sym_eig(m: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let mut a: Vec<f64> = m.as_array().iter().copied().collect();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entries in eigen input".into()));
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let max_sweeps = 100 * n;
    let mut converged = n == 1;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= f64::MIN_POSITIVE
                    || apq.abs() <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt()
                {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[r * n + p];
                    let h = a[r * n + q];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    a[r * n + p] = rp;
                    a[p * n + r] = rp;
                    a[r * n + q] = rq;
                    a[q * n + r] = rq;
                }
                for r in 0..n {
                    let g = v[r * n + p];
                    let h = v[r * n + q];
                    v[r * n + p] = g - s * (h + g * tau);
                    v[r * n + q] = h + s * (g - h * tau);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {max_sweeps} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = Array1::from_iter(order.iter().map(|&k| a[k * n + k]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0usize;
        for r in 0..n {
            if v[r * n + src].abs() > v[pivot * n + src].abs() {
                pivot = r;
            }
        }
        let sign = if v[pivot * n + src] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[[r, dst]] = sign * v[r * n + src];
        }
    }
    Ok(SpectralDecomposition { vectors, values })
}

/// Matrix exponential of a symmetric matrix via its spectrum.
pub fn matrix_exp(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eig(a)?;
    for &x in eig.values() {
        let e = x.exp();
        if !e.is_finite() || e == 0.0 {
            return Err(Error::Numerical(format!(
                "exponential of eigenvalue {x} is outside the floating range"
            )));
        }
    }
    Ok(eig.map(f64::exp))
}

/// Principal matrix logarithm of a positive definite matrix.
pub fn matrix_log(s: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eig(s)?;
    eig.require_positive(LOG_EIGEN_FLOOR)?;
    Ok(eig.map(f64::ln))
}

/// `S / det(S)^{1/q}`: the determinant-one representative of `S`.
pub fn shape_matrix(s: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eig(s)?;
    eig.require_positive(LOG_EIGEN_FLOOR)?;
    let mean_log = eig.values().iter().map(|x| x.ln()).sum::<f64>() / s.dim() as f64;
    Ok(s.scale((-mean_log).exp()))
}

/// Point at parameter `t` on the affine-invariant geodesic from `s0` to `s1`:
/// `S0^{1/2} (S0^{-1/2} S1 S0^{-1/2})^t S0^{1/2}`.
pub fn geodesic_point(s0: &SymmetricMatrix, s1: &SymmetricMatrix, t: f64) -> Result<SymmetricMatrix> {
    s0.check_dim(s1)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("geodesic parameter {t} outside [0, 1]")));
    }
    let e0 = sym_eig(s0)?;
    e0.require_positive(LOG_EIGEN_FLOOR)?;
    sym_eig(s1)?.require_positive(LOG_EIGEN_FLOOR)?;
    let root = e0.map(f64::sqrt);
    let inv_root = e0.map(|x| 1.0 / x.sqrt());
    let whitened = s1.congruence(inv_root.as_array());
    let ew = sym_eig(&whitened)?;
    ew.require_positive(LOG_EIGEN_FLOOR)?;
    let powered = ew.map(|x| x.powf(t));
    Ok(powered.congruence(root.as_array()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Frobenius,
    L1,
    Operator,
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frobenius" | "fro" => Ok(NormKind::Frobenius),
            "l1" => Ok(NormKind::L1),
            "operator" | "op" => Ok(NormKind::Operator),
            other => Err(Error::InvalidInput(format!("unknown norm kind '{other}'"))),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Frobenius => "frobenius",
            NormKind::L1 => "l1",
            NormKind::Operator => "operator",
        })
    }
}

pub fn matrix_norm(m: &SymmetricMatrix, kind: NormKind) -> Result<f64> {
    let a = m.as_array();
    Ok(match kind {
        NormKind::Frobenius => a.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::L1 => a
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Operator => {
            let eig = sym_eig(m)?;
            eig.largest().abs().max(eig.smallest().abs())
        }
    })
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    a.check_dim(b)?;
    let ab = a.matmul(b);
    let ba = b.matmul(a);
    Ok((&ab - &ba).iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Solves `H x = g` for symmetric positive definite `H` by Cholesky.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky_solve(h: &Array2<f64>, g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = h[[i, j]];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = g[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frob(a: &Array2<f64>) -> f64 {
        a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn rotation(theta: f64) -> Array2<f64> {
        let (s, c) = theta.sin_cos();
        ndarray::array![[c, -s], [s, c]]
    }

    #[test]
    fn identity_spectrum() {
        let eig = sym_eig(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(eig.values().to_vec(), vec![1.0, 1.0, 1.0]);
        let rec = eig.reconstruct();
        assert!(frob(&(rec.as_array() - SymmetricMatrix::identity(3).as_array())) < 1e-12);
    }

    #[test]
    fn rotated_diagonal_recovers_rotation_columns() {
        let r = rotation(0.3);
        let m = SymmetricMatrix::from_diag(&[4.0, 1.0]).congruence(&r);
        let eig = sym_eig(&m).unwrap();
        assert!((eig.values()[0] - 4.0).abs() < 1e-12);
        assert!((eig.values()[1] - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let dot: f64 = (0..2).map(|i| eig.vectors()[[i, k]] * r[[i, k]]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-12, "column {k} dot {dot}");
        }
    }

    #[test]
    fn compound_symmetry_inverse_spectrum() {
        // Σ⁻¹ has unit diagonal and 0.6 off-diagonal: eigenvalues 0.4 (×59) and
        // 1 + 59·0.6 = 36.4, so Σ has 2.5 (×59) and 1/36.4.
        let q = 60;
        let prec = SymmetricMatrix::from_fn(q, |i, j| if i == j { 1.0 } else { 0.6 });
        let eig = sym_eig(&prec).unwrap();
        let sigma = eig.map(|x| 1.0 / x);
        let es = sym_eig(&sigma).unwrap();
        for j in 0..59 {
            assert!((es.values()[j] - 2.5).abs() < 1e-10);
        }
        assert!((es.values()[59] - 1.0 / 36.4).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut a = Array2::<f64>::eye(2);
        a[[0, 0]] = f64::NAN;
        assert!(matches!(SymmetricMatrix::new(a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = ndarray::array![[1.0, 2.0], [0.0, 1.0]];
        assert!(SymmetricMatrix::new(a).is_err());
    }

    #[test]
    fn exp_and_log_basics() {
        let z = SymmetricMatrix::zeros(3);
        let e = matrix_exp(&z).unwrap();
        assert!(frob(&(e.as_array() - Array2::<f64>::eye(3))) < 1e-14);
        let l = matrix_log(&SymmetricMatrix::identity(3)).unwrap();
        assert!(frob(l.as_array()) < 1e-14);
        let l = matrix_log(&SymmetricMatrix::identity(2).scale(std::f64::consts::E)).unwrap();
        assert!(frob(&(l.as_array() - Array2::<f64>::eye(2))) < 1e-14);
        let l = matrix_log(&SymmetricMatrix::from_diag(&[4.0, 1.0])).unwrap();
        assert!((l.get(0, 0) - 4f64.ln()).abs() < 1e-14);
        assert!(l.get(1, 1).abs() < 1e-14 && l.get(0, 1).abs() < 1e-14);
    }

    #[test]
    fn log_rejects_singular() {
        let s = SymmetricMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(matrix_log(&s), Err(Error::NotPositiveDefinite { .. })));
        let s = SymmetricMatrix::from_diag(&[1.0, -2.0]);
        assert!(matches!(shape_matrix(&s), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn exp_overflow_reports_eigenvalue() {
        let a = SymmetricMatrix::from_diag(&[800.0, 0.0]);
        match matrix_exp(&a) {
            Err(Error::Numerical(msg)) => assert!(msg.contains("800")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_matrix_cases() {
        let v = shape_matrix(&SymmetricMatrix::identity(3)).unwrap();
        assert!(frob(&(v.as_array() - Array2::<f64>::eye(3))) < 1e-14);
        let v = shape_matrix(&SymmetricMatrix::identity(60).scale(5.0)).unwrap();
        assert!(frob(&(v.as_array() - Array2::<f64>::eye(60))) < 1e-12);
        let v = shape_matrix(&SymmetricMatrix::from_diag(&[4.0, 1.0])).unwrap();
        assert!((v.get(0, 0) - 2.0).abs() < 1e-14 && (v.get(1, 1) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn geodesic_endpoints_and_commuting_midpoint() {
        let s0 = SymmetricMatrix::from_diag(&[1.0, 4.0]);
        let s1 = SymmetricMatrix::from_diag(&[4.0, 1.0]);
        let mid = geodesic_point(&s0, &s1, 0.5).unwrap();
        assert!((mid.get(0, 0) - 2.0).abs() < 1e-14);
        assert!((mid.get(1, 1) - 2.0).abs() < 1e-14);
        let a = geodesic_point(&s0, &s1, 0.0).unwrap();
        let b = geodesic_point(&s0, &s1, 1.0).unwrap();
        assert!(frob(&(a.as_array() - s0.as_array())) < 1e-10);
        assert!(frob(&(b.as_array() - s1.as_array())) < 1e-10);
        assert!(geodesic_point(&s0, &s1, 1.5).is_err());
        assert!(geodesic_point(&s0, &SymmetricMatrix::from_diag(&[1.0, 0.0]), 0.5).is_err());
    }

    #[test]
    fn norms() {
        let m = SymmetricMatrix::from_diag(&[3.0, 4.0]);
        assert_eq!(matrix_norm(&m, NormKind::Frobenius).unwrap(), 5.0);
        assert_eq!(matrix_norm(&m, NormKind::L1).unwrap(), 4.0);
        assert_eq!(matrix_norm(&m, NormKind::Operator).unwrap(), 4.0);
        let z = SymmetricMatrix::zeros(4);
        for k in [NormKind::Frobenius, NormKind::L1, NormKind::Operator] {
            assert_eq!(matrix_norm(&z, k).unwrap(), 0.0);
        }
        let neg = SymmetricMatrix::from_diag(&[1.0, -7.0]);
        assert_eq!(matrix_norm(&neg, NormKind::Operator).unwrap(), 7.0);
    }

    #[test]
    fn cholesky_solves_spd_and_rejects_indefinite() {
        let h = ndarray::array![[4.0, 1.0], [1.0, 3.0]];
        let x = cholesky_solve(&h, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        let bad = ndarray::array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky_solve(&bad, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn serde_round_trip_via_rows() {
        let m = SymmetricMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[2.0,0.5],[0.5,1.0]]");
        let back: SymmetricMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SymmetricMatrix>("[[1.0,2.0],[0.0,1.0]]").is_err());
    }
}
