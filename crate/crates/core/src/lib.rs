//! Log-eigenvalue shrinkage estimators for covariance matrices.
//!
//! A penalized Gaussian likelihood with an orthogonally invariant penalty on
//! `log Σ` is minimised by keeping the eigenvectors of the sample covariance
//! and solving a convex problem for the log-eigenvalues. The crate provides
//! the estimators, the solvers, validation tuning, the Monte Carlo and LDA
//! studies, and numerical probes of the underlying convexity results.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod penalty;
pub mod simulation;
pub mod solver;
pub mod verify;

pub use classify::{run_classification, ClassificationReport, ClassifyConfig, LabeledDataset};
pub use error::{Error, Result};
pub use estimator::{fit, gauss_loss, sample_cov, tune, EstimatorMethod, FitResult, GridSpec, TuneResult};
pub use linalg::{NormKind, SpectralDecomposition, SymmetricMatrix};
pub use metrics::{discrepancy, DiscrepancyReport};
pub use penalty::{Center, CenterRule, LogEigenvalues, PenaltyFamily, PenaltySpec};
pub use simulation::{run_protocol, ModelId, SimConfig, SimulationReport};
pub use solver::{SolveOutcome, SolverConfig};
pub use verify::{ProbeReport, VerifyReport};
