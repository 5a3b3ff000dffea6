//! Orthogonally invariant penalties written as symmetric functions of the
//! log-eigenvalues `a_j = log λ_j`.
//!
//! Every family exposes its value, gradient and Hessian on ℝ^q. The adjusted
//! family carries a centre `c` that is either fixed or derived from the sample
//! eigenvalues; derived centres must be resolved with [`resolve_center`]
//! before the penalty can be evaluated.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::zero_eigen_threshold;

/// Log-eigenvalues `a_j = log λ_j` of a covariance estimate, finite and
/// non-increasing (up to a relative slack of 1e-9 for rounding).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LogEigenvalues(Vec<f64>);

impl LogEigenvalues {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        check_finite(&a)?;
        for w in a.windows(2) {
            if w[1] - w[0] > 1e-9 * w[0].abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "log-eigenvalues not in descending order ({} before {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self(a))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `λ_j = e^{a_j}`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.exp()).collect()
    }
}

impl TryFrom<Vec<f64>> for LogEigenvalues {
    type Error = Error;

    fn try_from(a: Vec<f64>) -> Result<Self> {
        Self::new(a)
    }
}

impl From<LogEigenvalues> for Vec<f64> {
    fn from(a: LogEigenvalues) -> Self {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyFamily {
    /// `Σ a_j²`
    LogFrobenius,
    /// `Σ (a_j − ā)²`
    ShapeLogFrobenius,
    /// `Σ (a_j − c)²`
    AdjustedLogFrobenius,
    /// `Σ (e^{−a_j} + a_j)`, i.e. `tr Σ⁻¹ + log det Σ`
    KlIdentity,
    /// `Σ e^{ā − a_j}`, i.e. `q` times geometric over harmonic mean
    ShapeKl,
    /// `e^{max a − min a}`; non-smooth, probes only
    ConditionNumber,
}

impl PenaltyFamily {
    pub const ALL: [PenaltyFamily; 6] = [
        PenaltyFamily::LogFrobenius,
        PenaltyFamily::ShapeLogFrobenius,
        PenaltyFamily::AdjustedLogFrobenius,
        PenaltyFamily::KlIdentity,
        PenaltyFamily::ShapeKl,
        PenaltyFamily::ConditionNumber,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PenaltyFamily::LogFrobenius => "log_frobenius",
            PenaltyFamily::ShapeLogFrobenius => "shape_log_frobenius",
            PenaltyFamily::AdjustedLogFrobenius => "adjusted_log_frobenius",
            PenaltyFamily::KlIdentity => "kl_identity",
            PenaltyFamily::ShapeKl => "shape_kl",
            PenaltyFamily::ConditionNumber => "condition_number",
        }
    }

    /// Invariant under `a ↦ a + s·1`.
    pub fn is_scale_invariant(self) -> bool {
        matches!(self, PenaltyFamily::ShapeLogFrobenius | PenaltyFamily::ShapeKl | PenaltyFamily::ConditionNumber)
    }

    pub fn is_smooth(self) -> bool {
        self != PenaltyFamily::ConditionNumber
    }
}

impl FromStr for PenaltyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PenaltyFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown penalty family '{s}'")))
    }
}

impl fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    Fixed,
    MeanLogEigPlusBias,
    LogMeanEig,
}

/// Centre of the adjusted family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    Fixed(f64),
    /// `(1/q) Σ log d_j + bias`, averaging over strictly positive `d_j`.
    MeanLogEigPlusBias { bias: f64 },
    /// `log(tr S / q)`.
    LogMeanEig,
}

impl Center {
    pub fn rule(&self) -> CenterRule {
        match self {
            Center::Fixed(_) => CenterRule::Fixed,
            Center::MeanLogEigPlusBias { .. } => CenterRule::MeanLogEigPlusBias,
            Center::LogMeanEig => CenterRule::LogMeanEig,
        }
    }
}

/// Penalty family plus its parameters. The centre is present exactly when
/// the family is [`PenaltyFamily::AdjustedLogFrobenius`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PenaltyConfig", into = "PenaltyConfig")]
pub struct PenaltySpec {
    family: PenaltyFamily,
    center: Option<Center>,
}

impl PenaltySpec {
    /// Any family other than the adjusted one.
    pub fn new(family: PenaltyFamily) -> Result<Self> {
        if family == PenaltyFamily::AdjustedLogFrobenius {
            return Err(Error::Configuration(
                "adjusted_log_frobenius requires a centre; use PenaltySpec::adjusted".into(),
            ));
        }
        Ok(Self { family, center: None })
    }

    pub fn adjusted(center: Center) -> Self {
        Self {
            family: PenaltyFamily::AdjustedLogFrobenius,
            center: Some(center),
        }
    }

    pub fn log_frobenius() -> Self {
        Self { family: PenaltyFamily::LogFrobenius, center: None }
    }

    pub fn shape_log_frobenius() -> Self {
        Self { family: PenaltyFamily::ShapeLogFrobenius, center: None }
    }

    pub fn family(&self) -> PenaltyFamily {
        self.family
    }

    pub fn center(&self) -> Option<Center> {
        self.center
    }

    /// The fixed centre, if the penalty is adjusted and resolved.
    pub fn resolved_center(&self) -> Option<f64> {
        match self.center {
            Some(Center::Fixed(c)) => Some(c),
            _ => None,
        }
    }

    pub fn needs_resolution(&self) -> bool {
        matches!(self.center, Some(Center::MeanLogEigPlusBias { .. } | Center::LogMeanEig))
    }

    /// Replaces a data-dependent centre by its value for eigenvalues `d`.
    pub fn resolve(&self, d: &[f64]) -> Result<(PenaltySpec, CenterResolution)> {
        let res = resolve_center(self, d)?;
        let spec = match self.center {
            Some(_) => PenaltySpec::adjusted(Center::Fixed(res.center)),
            None => *self,
        };
        Ok((spec, res))
    }

    fn center_value(&self) -> Result<f64> {
        match self.center {
            Some(Center::Fixed(c)) => Ok(c),
            Some(other) => Err(Error::Configuration(format!(
                "centre rule {:?} has not been resolved against sample eigenvalues",
                other.rule()
            ))),
            None => Err(Error::Configuration("penalty has no centre".into())),
        }
    }
}

/// Flat, serialisable form of [`PenaltySpec`] used in configs and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub family: PenaltyFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_rule: Option<CenterRule>,
    #[serde(default)]
    pub bias: f64,
}

impl TryFrom<PenaltyConfig> for PenaltySpec {
    type Error = Error;

    fn try_from(c: PenaltyConfig) -> Result<Self> {
        if c.family != PenaltyFamily::AdjustedLogFrobenius {
            if c.center.is_some() || c.center_rule.is_some() {
                return Err(Error::Configuration(format!(
                    "family {} takes no centre",
                    c.family
                )));
            }
            return PenaltySpec::new(c.family);
        }
        let center = match (c.center, c.center_rule) {
            (Some(v), None) | (Some(v), Some(CenterRule::Fixed)) => Center::Fixed(v),
            (None, Some(CenterRule::MeanLogEigPlusBias)) => Center::MeanLogEigPlusBias { bias: c.bias },
            (None, Some(CenterRule::LogMeanEig)) => Center::LogMeanEig,
            (None, Some(CenterRule::Fixed)) => {
                return Err(Error::Configuration("centre rule 'fixed' needs a centre value".into()))
            }
            (None, None) => {
                return Err(Error::Configuration(
                    "adjusted_log_frobenius requires exactly one of center or center_rule".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Configuration(
                    "adjusted_log_frobenius takes either center or center_rule, not both".into(),
                ))
            }
        };
        Ok(PenaltySpec::adjusted(center))
    }
}

impl From<PenaltySpec> for PenaltyConfig {
    fn from(p: PenaltySpec) -> Self {
        let (center, center_rule, bias) = match p.center {
            None => (None, None, 0.0),
            Some(Center::Fixed(c)) => (Some(c), None, 0.0),
            Some(Center::MeanLogEigPlusBias { bias }) => (None, Some(CenterRule::MeanLogEigPlusBias), bias),
            Some(Center::LogMeanEig) => (None, Some(CenterRule::LogMeanEig), 0.0),
        };
        PenaltyConfig { family: p.family, center, center_rule, bias }
    }
}

/// Centre value together with a flag raised when zero eigenvalues were
/// dropped from a mean of logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterResolution {
    pub center: f64,
    pub singular_warning: bool,
}

fn mean(a: &[f64]) -> f64 {
    a.iter().sum::<f64>() / a.len() as f64
}

/// `a − ā·1`, with a second pass removing the rounding left in the mean so
/// the result sums to zero to working precision relative to its own size.
pub(crate) fn centered(a: &[f64]) -> Vec<f64> {
    let m = mean(a);
    let c: Vec<f64> = a.iter().map(|x| x - m).collect();
    let r = mean(&c);
    c.into_iter().map(|x| x - r).collect()
}

/// Centre for the adjusted family given sample eigenvalues `d` (descending).
/// Penalties without a centre resolve to 0.
pub fn resolve_center(p: &PenaltySpec, d: &[f64]) -> Result<CenterResolution> {
    let Some(center) = p.center else {
        return Ok(CenterResolution { center: 0.0, singular_warning: false });
    };
    if let Center::Fixed(c) = center {
        return Ok(CenterResolution { center: c, singular_warning: false });
    }
    let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if d.is_empty() || !(d_max > 0.0) {
        return Err(Error::InvalidInput("sample eigenvalues are all non-positive".into()));
    }
    match center {
        Center::LogMeanEig => Ok(CenterResolution {
            center: mean(d).ln(),
            singular_warning: false,
        }),
        Center::MeanLogEigPlusBias { bias } => {
            let tol = zero_eigen_threshold(d_max);
            let logs: Vec<f64> = d.iter().filter(|&&x| x > tol).map(|x| x.ln()).collect();
            Ok(CenterResolution {
                center: mean(&logs) + bias,
                singular_warning: logs.len() < d.len(),
            })
        }
        Center::Fixed(_) => unreachable!(),
    }
}

fn check_finite(a: &[f64]) -> Result<()> {
    if a.is_empty() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("log-eigenvalues must be a non-empty finite vector".into()));
    }
    Ok(())
}

fn argmax(a: &[f64]) -> usize {
    (0..a.len()).fold(0, |b, i| if a[i] > a[b] { i } else { b })
}

fn argmin(a: &[f64]) -> usize {
    (0..a.len()).fold(0, |b, i| if a[i] < a[b] { i } else { b })
}

/// `f(a)` for the penalty family. Symmetric in the entries of `a`.
pub fn penalty_value(p: &PenaltySpec, a: &[f64]) -> Result<f64> {
    check_finite(a)?;
    Ok(match p.family {
        PenaltyFamily::LogFrobenius => a.iter().map(|x| x * x).sum(),
        PenaltyFamily::ShapeLogFrobenius => centered(a).iter().map(|c| c * c).sum(),
        PenaltyFamily::AdjustedLogFrobenius => {
            let c = p.center_value()?;
            a.iter().map(|x| (x - c) * (x - c)).sum()
        }
        PenaltyFamily::KlIdentity => a.iter().map(|x| (-x).exp() + x).sum(),
        PenaltyFamily::ShapeKl => centered(a).iter().map(|c| (-c).exp()).sum(),
        PenaltyFamily::ConditionNumber => (a[argmax(a)] - a[argmin(a)]).exp(),
    })
}

/// Gradient of [`penalty_value`]. For the condition number this is the
/// almost-everywhere gradient.
pub fn penalty_grad(p: &PenaltySpec, a: &[f64]) -> Result<Vec<f64>> {
    check_finite(a)?;
    let q = a.len() as f64;
    Ok(match p.family {
        PenaltyFamily::LogFrobenius => a.iter().map(|x| 2.0 * x).collect(),
        PenaltyFamily::ShapeLogFrobenius => centered(a).iter().map(|c| 2.0 * c).collect(),
        PenaltyFamily::AdjustedLogFrobenius => {
            let c = p.center_value()?;
            a.iter().map(|x| 2.0 * (x - c)).collect()
        }
        PenaltyFamily::KlIdentity => a.iter().map(|x| 1.0 - (-x).exp()).collect(),
        PenaltyFamily::ShapeKl => {
            let w: Vec<f64> = centered(a).iter().map(|c| (-c).exp()).collect();
            let total: f64 = w.iter().sum();
            centered(&w.iter().map(|wk| total / q - wk).collect::<Vec<_>>())
        }
        PenaltyFamily::ConditionNumber => {
            let (hi, lo) = (argmax(a), argmin(a));
            let mut g = vec![0.0; a.len()];
            if hi != lo {
                let v = (a[hi] - a[lo]).exp();
                g[hi] = v;
                g[lo] = -v;
            }
            g
        }
    })
}

/// Hessian of [`penalty_value`].
pub fn penalty_hess(p: &PenaltySpec, a: &[f64]) -> Result<Array2<f64>> {
    check_finite(a)?;
    let n = a.len();
    let q = n as f64;
    let mut h = Array2::zeros((n, n));
    match p.family {
        PenaltyFamily::LogFrobenius => {
            h.diag_mut().fill(2.0);
        }
        PenaltyFamily::AdjustedLogFrobenius => {
            p.center_value()?;
            h.diag_mut().fill(2.0);
        }
        PenaltyFamily::ShapeLogFrobenius => {
            h.fill(-2.0 / q);
            for i in 0..n {
                h[[i, i]] += 2.0;
            }
        }
        PenaltyFamily::KlIdentity => {
            for i in 0..n {
                h[[i, i]] = (-a[i]).exp();
            }
        }
        PenaltyFamily::ShapeKl => {
            let w: Vec<f64> = centered(a).iter().map(|c| (-c).exp()).collect();
            let total: f64 = w.iter().sum();
            for k in 0..n {
                for l in 0..n {
                    h[[k, l]] = total / (q * q) - (w[k] + w[l]) / q;
                }
                h[[k, k]] += w[k];
            }
        }
        PenaltyFamily::ConditionNumber => {
            let (hi, lo) = (argmax(a), argmin(a));
            if hi != lo {
                let v = (a[hi] - a[lo]).exp();
                h[[hi, hi]] = v;
                h[[lo, lo]] = v;
                h[[hi, lo]] = -v;
                h[[lo, hi]] = -v;
            }
        }
    }
    Ok(h)
}
