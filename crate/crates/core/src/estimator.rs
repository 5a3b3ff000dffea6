//! Penalized covariance estimators and validation-loss tuning.
//!
//! A fit keeps the eigenvectors of the sample covariance and replaces its
//! eigenvalues `d` by `e^{â}`, where `â` minimises the reduced objective in
//! [`crate::solver`].

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compose, sym_eig, zero_eigen_threshold, SpectralDecomposition, SymmetricMatrix};
use crate::penalty::{Center, PenaltyFamily, PenaltySpec};
use crate::solver::{solve_generic, solve_percoordinate, solve_shape, SolveOutcome, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MethodConfig", into = "MethodConfig")]
pub enum EstimatorMethod {
    /// The sample covariance itself.
    S,
    /// `‖log Σ‖²_F`.
    LogF,
    /// `‖log Σ − mean(log λ) I‖²_F`.
    SLogF,
    /// `‖log Σ − (mean log d + bias) I‖²_F`.
    MLogF { bias: f64 },
    /// `‖log Σ − log(d̄) I‖²_F`.
    DLogF,
    Generic(PenaltySpec),
}

impl EstimatorMethod {
    /// The methods compared in the simulation study.
    pub const BUILT_IN: [EstimatorMethod; 5] = [
        EstimatorMethod::S,
        EstimatorMethod::LogF,
        EstimatorMethod::SLogF,
        EstimatorMethod::MLogF { bias: 0.0 },
        EstimatorMethod::DLogF,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Self::S => "S",
            Self::LogF => "LogF",
            Self::SLogF => "sLogF",
            Self::MLogF { .. } => "mLogF",
            Self::DLogF => "dLogF",
            Self::Generic(_) => "generic",
        }
    }

    /// Penalty used by the method; `None` for `S`.
    pub fn penalty(&self) -> Option<PenaltySpec> {
        match self {
            Self::S => None,
            Self::LogF => Some(PenaltySpec::adjusted(Center::Fixed(0.0))),
            Self::SLogF => Some(PenaltySpec::shape_log_frobenius()),
            Self::MLogF { bias } => Some(PenaltySpec::adjusted(Center::MeanLogEigPlusBias { bias: *bias })),
            Self::DLogF => Some(PenaltySpec::adjusted(Center::LogMeanEig)),
            Self::Generic(p) => Some(*p),
        }
    }

    pub fn is_penalized(&self) -> bool {
        !matches!(self, Self::S)
    }
}

impl fmt::Display for EstimatorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Generic(p) => write!(f, "generic({})", p.family()),
            other => f.write_str(other.id()),
        }
    }
}

impl FromStr for EstimatorMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" => Ok(Self::S),
            "logf" => Ok(Self::LogF),
            "slogf" => Ok(Self::SLogF),
            "mlogf" => Ok(Self::MLogF { bias: 0.0 }),
            "dlogf" => Ok(Self::DLogF),
            other => Err(Error::Configuration(format!(
                "unknown method '{other}' (expected S, LogF, sLogF, mLogF or dLogF)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MethodConfig {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    penalty: Option<PenaltySpec>,
}

impl TryFrom<MethodConfig> for EstimatorMethod {
    type Error = Error;

    fn try_from(c: MethodConfig) -> Result<Self> {
        if c.id == "generic" {
            let p = c
                .penalty
                .ok_or_else(|| Error::Configuration("generic method requires a penalty".into()))?;
            return Ok(Self::Generic(p));
        }
        if c.penalty.is_some() {
            return Err(Error::Configuration(format!("method {} does not take a penalty", c.id)));
        }
        match (c.id.parse::<EstimatorMethod>()?, c.bias) {
            (Self::MLogF { .. }, Some(bias)) => Ok(Self::MLogF { bias }),
            (_, Some(_)) => Err(Error::Configuration(format!("method {} does not take a bias", c.id))),
            (m, None) => Ok(m),
        }
    }
}

impl From<EstimatorMethod> for MethodConfig {
    fn from(m: EstimatorMethod) -> Self {
        let id = m.id().to_string();
        match m {
            EstimatorMethod::MLogF { bias } => Self { id, bias: Some(bias), penalty: None },
            EstimatorMethod::Generic(p) => Self { id, bias: None, penalty: Some(p) },
            _ => Self { id, bias: None, penalty: None },
        }
    }
}

/// Sample covariance with divisor `n`. `centered` subtracts the column
/// means first; otherwise this is `n⁻¹ Σ xᵢxᵢᵀ`.
pub fn sample_cov(data: &Array2<f64>, centered: bool) -> Result<SymmetricMatrix> {
    let (n, q) = data.dim();
    if n == 0 || q == 0 {
        return Err(Error::InvalidInput("data matrix is empty".into()));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("data contains non-finite values".into()));
    }
    let cov = if centered {
        let mean = data.mean_axis(ndarray::Axis(0)).expect("n > 0");
        let x = data - &mean;
        x.t().dot(&x) / n as f64
    } else {
        data.t().dot(data) / n as f64
    };
    Ok(SymmetricMatrix::symmetrized(cov))
}

/// `tr(Σ⁻¹S) + log det Σ`.
pub fn gauss_loss(sigma: &SymmetricMatrix, s: &SymmetricMatrix) -> Result<f64> {
    sigma.check_dim(s)?;
    let eig = sym_eig(sigma)?;
    let lmax = eig.largest();
    let lmin = eig.smallest();
    if !(lmax > 0.0) || lmin <= zero_eigen_threshold(lmax) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lmin });
    }
    let w = projected_diag(eig.vectors(), s);
    Ok(w.iter()
        .zip(eig.values())
        .map(|(wj, lj)| wj / lj + lj.ln())
        .sum())
}

/// Diagonal of `PᵀSP`.
fn projected_diag(p: &Array2<f64>, s: &SymmetricMatrix) -> Vec<f64> {
    let sp = s.as_array().dot(p);
    (0..p.ncols())
        .map(|j| p.column(j).dot(&sp.column(j)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub objective: f64,
    pub converged: bool,
}

impl From<&SolveOutcome> for FitDiagnostics {
    fn from(o: &SolveOutcome) -> Self {
        Self {
            iterations: o.iterations,
            final_grad_norm: o.final_grad_norm,
            objective: o.objective,
            converged: o.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub method: EstimatorMethod,
    pub eta: f64,
    #[serde(skip)]
    pub eigenvectors: Array2<f64>,
    /// `λ̂`, descending.
    pub eigenvalues: Vec<f64>,
    /// `â = log λ̂`; `−∞` entries only for a singular `S` under method `S`.
    pub log_eigenvalues: Vec<f64>,
    /// Sample eigenvalues `d` after clamping roundoff-level values to zero.
    pub sample_eigenvalues: Vec<f64>,
    /// Resolved penalty centre, when the penalty has one.
    pub center: Option<f64>,
    /// The sample covariance was singular.
    pub singular_input: bool,
    pub warnings: Vec<String>,
    pub diagnostics: Option<FitDiagnostics>,
    #[serde(skip)]
    raw: Option<SymmetricMatrix>,
}

impl FitResult {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ̂ = P diag(λ̂) Pᵀ`; method `S` returns the input unchanged.
    pub fn sigma_hat(&self) -> SymmetricMatrix {
        match &self.raw {
            Some(s) => s.clone(),
            None => compose(&self.eigenvectors, &self.eigenvalues),
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        let lmax = self.eigenvalues[0];
        lmax > 0.0 && *self.eigenvalues.last().expect("q >= 1") > zero_eigen_threshold(lmax)
    }

    /// `l(Σ̂; S_v)` without forming `Σ̂`.
    pub fn loss_against(&self, s_valid: &SymmetricMatrix) -> Result<f64> {
        if s_valid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: s_valid.dim() });
        }
        if !self.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: *self.eigenvalues.last().expect("q >= 1"),
            });
        }
        Ok(self.loss_from_projected(&projected_diag(&self.eigenvectors, s_valid)))
    }

    /// Loss given `w = diag(PᵀS_vP)` for this fit's eigenvectors `P`.
    fn loss_from_projected(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(&self.log_eigenvalues)
            .map(|(wj, aj)| wj * (-aj).exp() + aj)
            .sum()
    }
}

/// Sample covariance eigendecomposition prepared for repeated fits.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    s: SymmetricMatrix,
    eig: SpectralDecomposition,
    d: Vec<f64>,
}

impl PreparedSample {
    pub fn new(s: &SymmetricMatrix) -> Result<Self> {
        let eig = sym_eig(s)?;
        let lmax = eig.largest();
        if !(lmax > 0.0) {
            return Err(Error::InvalidInput(
                "sample covariance must be a nonzero positive semidefinite matrix".into(),
            ));
        }
        let thr = zero_eigen_threshold(lmax);
        if eig.smallest() < -thr.max(1e-10 * lmax) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: eig.smallest() });
        }
        let d = eig.values().iter().map(|&x| if x <= thr { 0.0 } else { x }).collect();
        Ok(Self { s: s.clone(), eig, d })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.d
    }

    pub fn is_singular(&self) -> bool {
        *self.d.last().expect("q >= 1") == 0.0
    }

    pub fn fit(&self, method: &EstimatorMethod, eta: f64, cfg: &SolverConfig) -> Result<FitResult> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidInput(format!("eta must be finite and >= 0, got {eta}")));
        }
        let singular = self.is_singular();
        let mut warnings = Vec::new();
        let Some(penalty) = method.penalty() else {
            if singular {
                warnings.push("sample covariance is singular".to_string());
            }
            let log: Vec<f64> = self.d.iter().map(|x| x.ln()).collect();
            return Ok(FitResult {
                method: method.clone(),
                eta,
                eigenvectors: self.eig.vectors().clone(),
                eigenvalues: self.d.clone(),
                log_eigenvalues: log,
                sample_eigenvalues: self.d.clone(),
                center: None,
                singular_input: singular,
                warnings,
                diagnostics: None,
                raw: Some(self.s.clone()),
            });
        };
        let (resolved, res) = penalty.resolve(&self.d)?;
        if res.singular_warning {
            warnings.push("zero sample eigenvalues were excluded from the mean log-eigenvalue".to_string());
        }
        let center = resolved.resolved_center();
        let outcome = match (resolved.family(), resolved.center()) {
            (PenaltyFamily::AdjustedLogFrobenius, Some(Center::Fixed(c))) => {
                solve_percoordinate(&self.d, eta, c, cfg)?
            }
            (PenaltyFamily::ShapeLogFrobenius, _) => solve_shape(&self.d, eta, cfg)?,
            _ => solve_generic(&self.d, eta, &resolved, cfg)?,
        };
        let log = outcome.a_hat.as_slice().to_vec();
        Ok(FitResult {
            method: method.clone(),
            eta,
            eigenvectors: self.eig.vectors().clone(),
            eigenvalues: log.iter().map(|a| a.exp()).collect(),
            log_eigenvalues: log,
            sample_eigenvalues: self.d.clone(),
            center,
            singular_input: singular,
            warnings,
            diagnostics: Some(FitDiagnostics::from(&outcome)),
            raw: None,
        })
    }
}

/// Fits `method` to the sample covariance `s` at penalty weight `eta`.
pub fn fit(method: &EstimatorMethod, s: &SymmetricMatrix, eta: f64) -> Result<FitResult> {
    fit_with(method, s, eta, &SolverConfig::default())
}

pub fn fit_with(method: &EstimatorMethod, s: &SymmetricMatrix, eta: f64, cfg: &SolverConfig) -> Result<FitResult> {
    PreparedSample::new(s)?.fit(method, eta, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Log,
    Linear,
}

/// `count` points from `min` to `max`. A log grid is preceded by `η = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { min: 1e-3, max: 1e4, count: 60, scale: GridScale::Log }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |m: &str| Err(Error::Configuration(format!("invalid grid: {m}")));
        if self.count == 0 {
            return bad("count must be positive");
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return bad("need finite min <= max");
        }
        let steps = (self.count - 1).max(1) as f64;
        match self.scale {
            GridScale::Log => {
                if !(self.min > 0.0) {
                    return bad("log grid needs min > 0");
                }
                let (lo, hi) = (self.min.log10(), self.max.log10());
                let mut v = vec![0.0];
                v.extend((0..self.count).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / steps)));
                Ok(v)
            }
            GridScale::Linear => {
                if self.min < 0.0 {
                    return bad("eta must be >= 0");
                }
                Ok((0..self.count)
                    .map(|i| self.min + (self.max - self.min) * i as f64 / steps)
                    .collect())
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `min,max,count,log` or `min,max,count,lin`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Configuration(format!("grid must be 'min,max,count,log|lin', got '{s}'"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let min = parts[0].parse().map_err(|_| bad())?;
        let max = parts[1].parse().map_err(|_| bad())?;
        let count = parts[2].parse().map_err(|_| bad())?;
        let scale = match parts[3] {
            "log" => GridScale::Log,
            "lin" | "linear" => GridScale::Linear,
            _ => return Err(bad()),
        };
        let g = Self { min, max, count, scale };
        g.values()?;
        Ok(g)
    }
}

/// `{0}` followed by 60 log-spaced points in `[1e-3, 1e4]`.
pub fn default_grid() -> Vec<f64> {
    GridSpec::default().values().expect("default grid is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub grid: Vec<f64>,
    /// Validation loss per grid point; `None` where the fit failed.
    pub losses: Vec<Option<f64>>,
    pub failures: Vec<(f64, String)>,
    pub selected_eta: f64,
    pub selected_loss: f64,
    pub fit: FitResult,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Configuration("tuning grid is empty".into()));
    }
    if grid.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::Configuration("grid values must be finite and >= 0".into()));
    }
    Ok(())
}

/// Index of the smallest loss; ties go to the smaller `η`, then the earlier
/// index.
pub fn select_min(grid: &[f64], losses: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, l) in losses.iter().enumerate() {
        let Some(l) = l else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let lb = losses[b].expect("best has a loss");
                if *l < lb || (*l == lb && grid[i] < grid[b]) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Chooses `η` from `grid` by the Gaussian loss of the training fit
/// against `s_valid`, and returns the fit at the selected value.
pub fn tune(
    method: &EstimatorMethod,
    s_train: &SymmetricMatrix,
    s_valid: &SymmetricMatrix,
    grid: &[f64],
) -> Result<TuneResult> {
    tune_with(method, &PreparedSample::new(s_train)?, s_valid, grid, &SolverConfig::default())
}

pub fn tune_with(
    method: &EstimatorMethod,
    train: &PreparedSample,
    s_valid: &SymmetricMatrix,
    grid: &[f64],
    cfg: &SolverConfig,
) -> Result<TuneResult> {
    if !method.is_penalized() {
        return Err(Error::Configuration("method S has no tuning parameter".into()));
    }
    check_grid(grid)?;
    s_valid.check_dim(&train.s)?;
    let w = projected_diag(train.eig.vectors(), s_valid);
    let mut fits = Vec::with_capacity(grid.len());
    let mut losses = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for &eta in grid {
        let scored = train.fit(method, eta, cfg).and_then(|f| {
            if f.is_positive_definite() {
                let l = f.loss_from_projected(&w);
                Ok((f, l))
            } else {
                Err(Error::NotPositiveDefinite { min_eigenvalue: *f.eigenvalues.last().expect("q >= 1") })
            }
        });
        match scored {
            Ok((f, l)) if l.is_finite() => {
                losses.push(Some(l));
                fits.push(Some(f));
            }
            Ok((_, l)) => {
                failures.push((eta, format!("validation loss is not finite ({l})")));
                losses.push(None);
                fits.push(None);
            }
            Err(e) => {
                failures.push((eta, e.to_string()));
                losses.push(None);
                fits.push(None);
            }
        }
    }
    let Some(best) = select_min(grid, &losses) else {
        return Err(Error::TuningFailure { failures });
    };
    Ok(TuneResult {
        grid: grid.to_vec(),
        selected_eta: grid[best],
        selected_loss: losses[best].expect("selected index has a loss"),
        fit: fits.swap_remove(best).expect("selected index has a fit"),
        losses,
        failures,
    })
}
