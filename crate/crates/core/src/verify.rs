//! Numerical probes of the convexity theory: geodesic convexity along
//! `Σ_t`, convexity in `log Σ`, log-majorization of geodesic eigenvalues,
//! penalty coercivity and the fitted-solution identity.
//!
//! Every probe is deterministic given its inputs and records a JSON witness
//! of its worst case.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimator::{gauss_loss, EstimatorMethod, FitResult};
use crate::linalg::{compose, geodesic_point, matrix_exp, matrix_log, matrix_norm, sym_eig, NormKind, SymmetricMatrix};
use crate::penalty::{penalty_value, Center, PenaltyFamily, PenaltySpec};
use crate::simulation::derive_seed;

/// Slack allowed in convexity inequalities.
pub const CONVEXITY_TOL: f64 = 1e-10;
/// Slack for log-majorization partial sums.
pub const MAJORIZATION_TOL: f64 = 1e-9;
/// Tolerance of `|Σ d_j e^{−â_j} − q|`.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: serde_json::Value,
    /// What the theory predicts for this probe.
    pub expectation: Expectation,
}

impl ProbeReport {
    fn new(name: impl Into<String>, worst: f64, tol: f64, witness: serde_json::Value, expectation: Expectation) -> Self {
        Self {
            name: name.into(),
            passed: worst <= tol,
            worst_violation: worst,
            tolerance: tol,
            witness,
            expectation,
        }
    }

    pub fn as_expected(&self) -> bool {
        self.passed == (self.expectation == Expectation::Pass)
    }
}

/// A function of a positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFunctional {
    /// `tr(Σ⁻¹S) + log det Σ` at fixed `S`.
    GaussLoss(SymmetricMatrix),
    /// An orthogonally invariant penalty with resolved centre.
    Penalty(PenaltySpec),
    /// `l(Σ; S) + η Π(Σ)`.
    PenalizedLoss { s: SymmetricMatrix, eta: f64, penalty: PenaltySpec },
    /// `max_k Σ_j |(log Σ)_{jk}|`.
    LogL1,
}

impl MatrixFunctional {
    pub fn name(&self) -> String {
        match self {
            Self::GaussLoss(_) => "gauss_loss".into(),
            Self::Penalty(p) => format!("penalty:{}", p.family()),
            Self::PenalizedLoss { penalty, .. } => format!("penalized_loss:{}", penalty.family()),
            Self::LogL1 => "log_l1".into(),
        }
    }

    pub fn eval(&self, sigma: &SymmetricMatrix) -> Result<f64> {
        let log_eigs = |m: &SymmetricMatrix| -> Result<Vec<f64>> {
            let e = sym_eig(m)?;
            if e.smallest() <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: e.smallest() });
            }
            Ok(e.values().iter().map(|x| x.ln()).collect())
        };
        match self {
            Self::GaussLoss(s) => gauss_loss(sigma, s),
            Self::Penalty(p) => penalty_value(p, &log_eigs(sigma)?),
            Self::PenalizedLoss { s, eta, penalty } => {
                Ok(gauss_loss(sigma, s)? + eta * penalty_value(penalty, &log_eigs(sigma)?)?)
            }
            Self::LogL1 => matrix_norm(&matrix_log(sigma)?, NormKind::L1),
        }
    }
}

/// Checks `F(Σ_t) ≤ (1−t)F(Σ₀) + tF(Σ₁)` at each `t` in `t_grid`.
pub fn gconvexity_probe(
    f: &MatrixFunctional,
    s0: &SymmetricMatrix,
    s1: &SymmetricMatrix,
    t_grid: &[f64],
) -> Result<ProbeReport> {
    let f0 = f.eval(s0)?;
    let f1 = f.eval(s1)?;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = json!(null);
    for &t in t_grid {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!("t must lie in (0, 1), got {t}")));
        }
        let ft = f.eval(&geodesic_point(s0, s1, t)?)?;
        let avg = (1.0 - t) * f0 + t * f1;
        let v = ft - avg;
        if v > worst || witness.is_null() {
            worst = v;
            witness = json!({
                "s0": s0.to_rows(), "s1": s1.to_rows(), "t": t,
                "value_at_t": ft, "chord": avg,
            });
        }
    }
    Ok(ProbeReport::new(
        format!("gconvexity:{}", f.name()),
        worst,
        CONVEXITY_TOL,
        witness,
        Expectation::Pass,
    ))
}

/// `tr(e^{−A}S)`.
pub fn trace_exp_neg(a: &SymmetricMatrix, s: &SymmetricMatrix) -> Result<f64> {
    let e = matrix_exp(&a.scale(-1.0))?;
    Ok((e.as_array() * s.as_array()).sum())
}

/// Midpoint convexity of `A ↦ tr(e^{−A}S)`; the violation is
/// `value(mid) − ½(value(A₀) + value(A₁))`.
pub fn logexp_convexity_probe(s: &SymmetricMatrix, a0: &SymmetricMatrix, a1: &SymmetricMatrix) -> Result<ProbeReport> {
    let mid = a0.add(a1)?.scale(0.5);
    let vm = trace_exp_neg(&mid, s)?;
    let avg = 0.5 * (trace_exp_neg(a0, s)? + trace_exp_neg(a1, s)?);
    let gap = vm - avg;
    Ok(ProbeReport::new(
        "logexp_convexity",
        gap,
        CONVEXITY_TOL,
        json!({
            "s": s.to_rows(), "a0": a0.to_rows(), "a1": a1.to_rows(),
            "midpoint_value": vm, "average_value": avg, "gap": gap,
        }),
        Expectation::Pass,
    ))
}

fn sorted_log_eigs(m: &SymmetricMatrix) -> Result<Vec<f64>> {
    let e = sym_eig(m)?;
    if e.smallest() <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: e.smallest() });
    }
    Ok(e.values().iter().map(|x| x.ln()).collect())
}

/// `log λ(Σ_t) ≺ (1−t) log λ(Σ₀) + t log λ(Σ₁)` via partial sums.
pub fn log_majorization_check(s0: &SymmetricMatrix, s1: &SymmetricMatrix, t: f64) -> Result<ProbeReport> {
    let lt = sorted_log_eigs(&geodesic_point(s0, s1, t)?)?;
    let l0 = sorted_log_eigs(s0)?;
    let l1 = sorted_log_eigs(s1)?;
    let rhs: Vec<f64> = l0.iter().zip(&l1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    let (mut pl, mut pr) = (0.0, 0.0);
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    for k in 0..lt.len() {
        pl += lt[k];
        pr += rhs[k];
        let v = if k + 1 == lt.len() { (pl - pr).abs() } else { pl - pr };
        if v > worst {
            worst = v;
            at = k + 1;
        }
    }
    Ok(ProbeReport::new(
        "log_majorization",
        worst,
        MAJORIZATION_TOL,
        json!({
            "s0": s0.to_rows(), "s1": s1.to_rows(), "t": t,
            "log_eigenvalues_t": lt, "combination": rhs, "partial_sum_index": at,
        }),
        Expectation::Pass,
    ))
}

/// Divergence checks along three log-eigenvalue paths in dimension 4:
///
/// 1. `a = (s, −s, 0, 0)`: `log det` fixed, `π(a) → ∞`;
/// 2. `a = (0, −s, −s, −s)`: `ā → −∞` with `a₁` fixed, `ā/π(a) → 0`;
/// 3. `a = (−s, −s, −s−1, −s−1)`: `a₁ → −∞` at gap 1, `(a₁ − a_q)/π(a)` bounded.
///
/// For the shape penalty path 3 also checks `(a₁ − a_q)/π(a) ≤ 1/(a₁ − a_q)`,
/// which is tight there.
pub fn coercivity_spot_check(p: &PenaltySpec) -> Result<ProbeReport> {
    let family = p.family();
    if !matches!(
        family,
        PenaltyFamily::LogFrobenius | PenaltyFamily::ShapeLogFrobenius | PenaltyFamily::ShapeKl
    ) {
        return Err(Error::Configuration(format!("coercivity check does not support {family}")));
    }
    let scales = [1e1, 1e3, 1e6];
    let val = |a: [f64; 4]| penalty_value(p, &a);
    // A non-finite penalty value has diverged; ratios against it are 0.
    let ratio = |num: f64, den: f64| if den.is_infinite() { 0.0 } else { num / den };

    let mut case1 = Vec::new();
    let mut case2 = Vec::new();
    let mut case3 = Vec::new();
    for &s in &scales {
        case1.push(val([s, -s, 0.0, 0.0])?);
        let a2 = [0.0, -s, -s, -s];
        case2.push(ratio(a2.iter().sum::<f64>() / 4.0, val(a2)?));
        case3.push(ratio(1.0, val([-s, -s, -s - 1.0, -s - 1.0])?));
    }
    // Each entry is 0 when the case behaves as required.
    let mut violations = Vec::new();
    let grows = case1.windows(2).all(|w| w[1] > w[0] || w[1].is_infinite()) && case1[2] >= 1e6;
    violations.push(if grows { 0.0 } else { 1.0 });
    let shrinks = case2[2].abs() < case2[0].abs() || case2[2] == 0.0;
    violations.push(if shrinks { (case2[2].abs() - 1e-5).max(0.0) } else { case2[2].abs().max(1.0) });
    let bounded = case3.iter().all(|r| r.is_finite());
    violations.push(if bounded { case3.iter().map(|r| r - case3[0]).fold(0.0, f64::max) } else { 1.0 });
    if family == PenaltyFamily::ShapeLogFrobenius {
        violations.push(case3.iter().map(|r| r - 1.0).fold(0.0, f64::max));
    }
    let worst = violations.iter().copied().fold(0.0, f64::max);
    Ok(ProbeReport::new(
        format!("coercivity:{family}"),
        worst,
        1e-9,
        json!({
            "scales": scales,
            "case_i_values": case1.iter().map(|v| if v.is_finite() { json!(v) } else { json!("inf") }).collect::<Vec<_>>(),
            "case_ii_ratio": case2,
            "case_iii_ratio": case3,
            "violations": violations,
        }),
        Expectation::Pass,
    ))
}

/// `|Σ_j d_j e^{−â_j} − q|` for a shape-penalized fit.
pub fn fit_identity_check(fit: &FitResult, d: &[f64]) -> Result<ProbeReport> {
    let shape = match &fit.method {
        EstimatorMethod::SLogF => true,
        EstimatorMethod::Generic(p) => p.family() == PenaltyFamily::ShapeLogFrobenius,
        _ => false,
    };
    if !shape {
        return Err(Error::Configuration(format!(
            "identity check applies to sLogF fits, not {}",
            fit.method
        )));
    }
    if d.len() != fit.dim() {
        return Err(Error::DimensionMismatch { expected: fit.dim(), actual: d.len() });
    }
    let sum: f64 = d
        .iter()
        .zip(&fit.log_eigenvalues)
        .map(|(dj, aj)| if *dj == 0.0 { 0.0 } else { dj * (-aj).exp() })
        .sum();
    let dev = (sum - d.len() as f64).abs();
    Ok(ProbeReport::new(
        "fit_identity",
        dev,
        IDENTITY_TOL,
        json!({ "eta": fit.eta, "d": d, "a_hat": fit.log_eigenvalues, "sum": sum }),
        Expectation::Pass,
    ))
}

/// The 2×2 pair showing `{e^{−A}}₁₁` is not convex in `A`.
pub fn counterexample_logexp() -> (SymmetricMatrix, SymmetricMatrix, SymmetricMatrix) {
    let a0 = SymmetricMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 300.0]]).expect("valid");
    let a1 = SymmetricMatrix::from_rows(&[vec![0.0, -0.01], vec![-0.01, -0.01]]).expect("valid");
    let e11 = SymmetricMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).expect("valid");
    (e11, a0, a1)
}

/// The 3×3 pair showing the log-L1 norm is not geodesically convex.
pub fn counterexample_log_l1() -> (SymmetricMatrix, SymmetricMatrix) {
    let toeplitz = |r: f64| SymmetricMatrix::from_fn(3, |i, j| r.powi((j - i) as i32));
    (toeplitz(0.3), toeplitz(0.9))
}

pub fn counterexample_logexp_probe() -> Result<ProbeReport> {
    let (s, a0, a1) = counterexample_logexp();
    let mut r = logexp_convexity_probe(&s, &a0, &a1)?;
    r.name = "counterexample:logexp_entry".into();
    r.expectation = Expectation::Fail;
    Ok(r)
}

pub fn counterexample_log_l1_probe() -> Result<ProbeReport> {
    let (s0, s1) = counterexample_log_l1();
    let mut r = gconvexity_probe(&MatrixFunctional::LogL1, &s0, &s1, &[0.5])?;
    r.name = "counterexample:log_l1".into();
    r.expectation = Expectation::Fail;
    Ok(r)
}

/// Haar-distributed orthogonal matrix: Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(q: usize, rng: &mut R) -> Array2<f64> {
    loop {
        let mut m = Array2::<f64>::from_shape_simple_fn((q, q), || rng.sample(StandardNormal));
        let mut ok = true;
        for j in 0..q {
            for k in 0..j {
                let proj = m.column(k).dot(&m.column(j));
                let ck = m.column(k).to_owned();
                m.column_mut(j).scaled_add(-proj, &ck);
            }
            let norm = m.column(j).dot(&m.column(j)).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            m.column_mut(j).mapv_inplace(|x| x / norm);
        }
        if ok {
            return m;
        }
    }
}

/// `Q diag(e^{u}) Qᵀ` with `u_j ~ U[−3, 3]` and random orthogonal `Q`.
pub fn random_spd<R: Rng>(q: usize, rng: &mut R) -> SymmetricMatrix {
    let logs = random_log_eigs(q, rng);
    let h = random_orthogonal(q, rng);
    compose(&h, &logs.iter().map(|x| x.exp()).collect::<Vec<_>>())
}

/// Symmetric matrix with eigenvalues uniform on `[−3, 3]`.
pub fn random_symmetric<R: Rng>(q: usize, rng: &mut R) -> SymmetricMatrix {
    let logs = random_log_eigs(q, rng);
    compose(&random_orthogonal(q, rng), &logs)
}

fn random_log_eigs<R: Rng>(q: usize, rng: &mut R) -> Vec<f64> {
    let u = Uniform::new_inclusive(-3.0, 3.0).expect("valid range");
    (0..q).map(|_| rng.sample(u)).collect()
}

/// Families used in the convexity cross-check, each with a resolved centre.
pub fn crosscheck_families() -> Vec<PenaltySpec> {
    PenaltyFamily::ALL
        .iter()
        .map(|&f| match f {
            PenaltyFamily::AdjustedLogFrobenius => PenaltySpec::adjusted(Center::Fixed(0.5)),
            other => PenaltySpec::new(other).expect("non-adjusted family"),
        })
        .collect()
}

/// Agreement between midpoint convexity of `f` on `ℝ^q` and geodesic
/// convexity of the induced matrix function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub family: PenaltyFamily,
    pub pairs: usize,
    pub vector_convex: bool,
    pub vector_worst: f64,
    pub geodesic_convex: bool,
    pub geodesic_worst: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub pairs: usize,
    pub q: usize,
    pub t_grid: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            pairs: 1000,
            q: 5,
            t_grid: (1..10).map(|k| k as f64 / 10.0).collect(),
        }
    }
}

fn pair_rng(cfg: &SuiteConfig, stream: u64, i: usize) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, &[stream, i as u64]))
}

fn worst_of(reports: Vec<ProbeReport>, name: &str, expectation: Expectation) -> ProbeReport {
    let tol = reports.first().map(|r| r.tolerance).unwrap_or(0.0);
    let worst = reports
        .into_iter()
        .max_by(|a, b| a.worst_violation.total_cmp(&b.worst_violation))
        .expect("at least one pair");
    ProbeReport::new(name, worst.worst_violation, tol, worst.witness, expectation)
}

/// Runs `check` on `cfg.pairs` independent random draws in parallel.
fn over_pairs<F>(cfg: &SuiteConfig, stream: u64, name: &str, check: F) -> Result<ProbeReport>
where
    F: Fn(&mut ChaCha20Rng) -> Result<ProbeReport> + Sync,
{
    let reports: Result<Vec<ProbeReport>> = (0..cfg.pairs.max(1))
        .into_par_iter()
        .map(|i| check(&mut pair_rng(cfg, stream, i)))
        .collect();
    Ok(worst_of(reports?, name, Expectation::Pass))
}

/// Midpoint convexity of a penalty on random vectors.
fn vector_convexity(cfg: &SuiteConfig, stream: u64, p: &PenaltySpec) -> Result<(bool, f64)> {
    let worst: Result<Vec<f64>> = (0..cfg.pairs.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = pair_rng(cfg, stream, i);
            let x = random_log_eigs(cfg.q, &mut rng);
            let y = random_log_eigs(cfg.q, &mut rng);
            let mut w = f64::NEG_INFINITY;
            for &t in &cfg.t_grid {
                let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                let v = penalty_value(p, &z)? - ((1.0 - t) * penalty_value(p, &x)? + t * penalty_value(p, &y)?);
                w = w.max(v);
            }
            Ok(w)
        })
        .collect();
    let w = worst?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok((w <= CONVEXITY_TOL, w))
}

pub fn theorem1_crosscheck(cfg: &SuiteConfig) -> Result<Vec<CrossCheck>> {
    crosscheck_families()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (vector_convex, vector_worst) = vector_convexity(cfg, 100 + k as u64, p)?;
            let g = over_pairs(cfg, 200 + k as u64, "g", |rng| {
                let s0 = random_spd(cfg.q, rng);
                let s1 = random_spd(cfg.q, rng);
                gconvexity_probe(&MatrixFunctional::Penalty(*p), &s0, &s1, &cfg.t_grid)
            })?;
            Ok(CrossCheck {
                family: p.family(),
                pairs: cfg.pairs,
                vector_convex,
                vector_worst,
                geodesic_convex: g.passed,
                geodesic_worst: g.worst_violation,
                agree: vector_convex == g.passed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: SuiteConfig,
    pub probes: Vec<ProbeReport>,
    pub crosscheck: Vec<CrossCheck>,
}

impl VerifyReport {
    /// Every probe matched its expectation and every cross-check agreed.
    pub fn all_as_expected(&self) -> bool {
        self.probes.iter().all(ProbeReport::as_expected) && self.crosscheck.iter().all(|c| c.agree)
    }
}

/// The full verification suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerifyReport> {
    if cfg.q < 2 || cfg.t_grid.is_empty() {
        return Err(Error::Configuration("suite needs q >= 2 and a nonempty t grid".into()));
    }
    let q = cfg.q;
    let mut probes = vec![counterexample_logexp_probe()?, counterexample_log_l1_probe()?];
    probes.push(over_pairs(cfg, 1, "gconvexity:penalty:log_frobenius", |rng| {
        let (s0, s1) = (random_spd(q, rng), random_spd(q, rng));
        gconvexity_probe(&MatrixFunctional::Penalty(PenaltySpec::log_frobenius()), &s0, &s1, &cfg.t_grid)
    })?);
    probes.push(over_pairs(cfg, 2, "gconvexity:gauss_loss", |rng| {
        let (s0, s1) = (random_spd(q, rng), random_spd(q, rng));
        let f = MatrixFunctional::GaussLoss(SymmetricMatrix::identity(q));
        gconvexity_probe(&f, &s0, &s1, &cfg.t_grid)
    })?);
    probes.push(over_pairs(cfg, 3, "gconvexity:penalized_loss:shape_log_frobenius", |rng| {
        let (s0, s1, s) = (random_spd(q, rng), random_spd(q, rng), random_spd(q, rng));
        let f = MatrixFunctional::PenalizedLoss { s, eta: 1.0, penalty: PenaltySpec::shape_log_frobenius() };
        gconvexity_probe(&f, &s0, &s1, &cfg.t_grid)
    })?);
    probes.push(over_pairs(cfg, 4, "logexp_convexity:identity", |rng| {
        let (a0, a1) = (random_symmetric(q, rng), random_symmetric(q, rng));
        logexp_convexity_probe(&SymmetricMatrix::identity(q), &a0, &a1)
    })?);
    probes.push(over_pairs(cfg, 5, "log_majorization", |rng| {
        let (s0, s1) = (random_spd(q, rng), random_spd(q, rng));
        log_majorization_check(&s0, &s1, 0.5)
    })?);
    for p in [PenaltySpec::log_frobenius(), PenaltySpec::shape_log_frobenius(), PenaltySpec::new(PenaltyFamily::ShapeKl)?] {
        probes.push(coercivity_spot_check(&p)?);
    }
    probes.push(over_pairs(cfg, 6, "fit_identity", |rng| {
        let s = random_spd(q, rng);
        let eta = [0.0, 0.1, 1.0, 10.0, 1e3][rng.random_range(0..5)];
        let fit = crate::estimator::fit(&EstimatorMethod::SLogF, &s, eta)?;
        fit_identity_check(&fit, &fit.sample_eigenvalues.clone())
    })?);
    let crosscheck = theorem1_crosscheck(cfg)?;
    Ok(VerifyReport { config: cfg.clone(), probes, crosscheck })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig { pairs: 50, ..SuiteConfig::default() }
    }

    #[test]
    fn logexp_counterexample_digits() {
        let r = counterexample_logexp_probe().unwrap();
        let mid = r.witness["midpoint_value"].as_f64().unwrap();
        let avg = r.witness["average_value"].as_f64().unwrap();
        assert!((mid - 1.001690296).abs() < 1e-7, "{mid}");
        assert!((avg - 1.001688939).abs() < 1e-7, "{avg}");
        assert!(!r.passed && r.as_expected());
    }

    #[test]
    fn log_l1_counterexample_digits() {
        let r = counterexample_log_l1_probe().unwrap();
        let ft = r.witness["value_at_t"].as_f64().unwrap();
        let chord = r.witness["chord"].as_f64().unwrap();
        assert!((ft - 2.289438).abs() < 1e-5, "{ft}");
        assert!((chord - 2.284073).abs() < 1e-5, "{chord}");
        assert!((r.worst_violation - 0.005365).abs() < 2e-5);
        assert!(!r.passed && r.as_expected());
    }

    #[test]
    fn equal_arguments_have_zero_gap() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a = random_symmetric(4, &mut rng);
        let r = logexp_convexity_probe(&random_spd(4, &mut rng), &a, &a).unwrap();
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn majorization_commuting_and_endpoints() {
        let s0 = SymmetricMatrix::from_diag(&[4.0, 2.0, 1.0]);
        let s1 = SymmetricMatrix::from_diag(&[8.0, 1.0, 0.5]);
        let r = log_majorization_check(&s0, &s1, 0.3).unwrap();
        assert!(r.passed && r.worst_violation.abs() < 1e-12);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (a, b) = (random_spd(4, &mut rng), random_spd(4, &mut rng));
        for t in [0.0, 1.0] {
            let r = log_majorization_check(&a, &b, t).unwrap();
            assert!(r.worst_violation.abs() < 1e-9);
        }
    }

    #[test]
    fn random_matrices_are_valid() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let h = random_orthogonal(6, &mut rng);
        let g = h.t().dot(&h);
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - e).abs() < 1e-12);
            }
        }
        let s = random_spd(6, &mut rng);
        let e = sym_eig(&s).unwrap();
        assert!(e.largest() <= 3f64.exp() * (1.0 + 1e-10));
        assert!(e.smallest() >= (-3f64).exp() * (1.0 - 1e-10));
    }

    #[test]
    fn coercivity_checks() {
        for p in [PenaltySpec::log_frobenius(), PenaltySpec::shape_log_frobenius(), PenaltySpec::new(PenaltyFamily::ShapeKl).unwrap()] {
            let r = coercivity_spot_check(&p).unwrap();
            assert!(r.passed, "{}: {}", r.name, r.witness);
        }
        assert!(coercivity_spot_check(&PenaltySpec::new(PenaltyFamily::ConditionNumber).unwrap()).is_err());
        // Π_R along (s, −s, 0, 0) equals 2s²
        let v = penalty_value(&PenaltySpec::log_frobenius(), &[1e3, -1e3, 0.0, 0.0]).unwrap();
        assert_eq!(v, 2e6);
    }

    #[test]
    fn identity_check_and_negative_control() {
        let s = SymmetricMatrix::from_rows(&[vec![3.0, 0.5, 0.0], vec![0.5, 2.0, 0.1], vec![0.0, 0.1, 0.7]]).unwrap();
        for eta in [0.0, 0.5, 20.0] {
            let fit = crate::estimator::fit(&EstimatorMethod::SLogF, &s, eta).unwrap();
            let d = fit.sample_eigenvalues.clone();
            assert!(fit_identity_check(&fit, &d).unwrap().passed);
            let mut bad = fit.clone();
            bad.log_eigenvalues[0] += 1e-3;
            assert!(!fit_identity_check(&bad, &d).unwrap().passed);
        }
        let logf = crate::estimator::fit(&EstimatorMethod::LogF, &s, 1.0).unwrap();
        assert!(fit_identity_check(&logf, &logf.sample_eigenvalues.clone()).is_err());
    }

    #[test]
    fn small_suite_behaves() {
        let r = run_suite(&small()).unwrap();
        for p in &r.probes {
            assert!(p.as_expected(), "{} worst {}", p.name, p.worst_violation);
        }
        for c in &r.crosscheck {
            assert!(c.agree && c.vector_convex, "{c:?}");
        }
        assert_eq!(r, run_suite(&small()).unwrap());
    }
}
