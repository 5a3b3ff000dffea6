//! Discrepancy between an estimate and the true covariance.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{matrix_norm, sym_eig, NormKind, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    /// `‖Σ̂ − Σ‖_F`
    pub fnorm: f64,
    /// Maximum absolute column sum of `Σ̂ − Σ`.
    pub l1: f64,
    /// Largest singular value of `Σ̂ − Σ`.
    pub opnorm: f64,
    /// `|λ̂₁ − λ₁|`
    pub delta1: f64,
}

impl DiscrepancyReport {
    pub const MEASURES: [&'static str; 4] = ["fnorm", "l1", "opnorm", "delta1"];

    pub fn values(&self) -> [f64; 4] {
        [self.fnorm, self.l1, self.opnorm, self.delta1]
    }
}

pub fn discrepancy(sigma_hat: &SymmetricMatrix, sigma: &SymmetricMatrix) -> Result<DiscrepancyReport> {
    let diff = sigma_hat.sub(sigma)?;
    let top_hat = sym_eig(sigma_hat)?.largest();
    let top = sym_eig(sigma)?.largest();
    Ok(DiscrepancyReport {
        fnorm: matrix_norm(&diff, NormKind::Frobenius)?,
        l1: matrix_norm(&diff, NormKind::L1)?,
        opnorm: matrix_norm(&diff, NormKind::Operator)?,
        delta1: (top_hat - top).abs(),
    })
}
