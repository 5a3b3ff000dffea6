//! Minimisation of the reduced objective
//!
//! ```text
//! L_q(a; d; η) = Σ_j d_j e^{−a_j} + a_j + η π(a)
//! ```
//!
//! over `a ∈ ℝ^q`, where `d` are the sample eigenvalues and `π` a convex,
//! symmetric penalty. Three solvers share one damped-Newton driver:
//!
//! * [`solve_percoordinate`] for `π(a) = Σ (a_j − c)²`, where the Newton
//!   update decouples into `q` scalar updates;
//! * [`solve_shape`] for `π(a) = Σ (a_j − ā)²`, whose Hessian is diagonal
//!   minus a rank-one term and is inverted in closed form;
//! * [`solve_generic`] for any smooth convex penalty, using a dense
//!   Cholesky solve.
//!
//! Each step first tries the full Newton step and backtracks (Armijo) only
//! when that fails to decrease the objective, so near the optimum the
//! iteration is exactly the plain Newton update.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, sym_eig, SymmetricMatrix};
use crate::penalty::{centered, penalty_grad, penalty_hess, penalty_value, LogEigenvalues, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub enabled: bool,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            enabled: true,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Converged when `‖∇L_q‖_∞ ≤ grad_tol · max(1, |L_q|)`, or when the
    /// Newton step falls below working precision.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 200,
            line_search: LineSearch::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        if !(self.grad_tol > 0.0) {
            return Err(Error::Configuration("grad_tol must be positive".into()));
        }
        if !(ls.backtrack_factor > 0.0 && ls.backtrack_factor < 1.0) {
            return Err(Error::Configuration("backtrack_factor must lie in (0, 1)".into()));
        }
        if !(ls.armijo_c > 0.0 && ls.armijo_c < 1.0) {
            return Err(Error::Configuration("armijo_c must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub a_hat: LogEigenvalues,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub objective: f64,
    pub converged: bool,
}

/// `d e^{−a}` computed without forming `0 · ∞`.
#[inline]
fn weighted_exp(d: f64, a: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d * (-a).exp()
    }
}

fn data_term(a: &[f64], d: &[f64]) -> f64 {
    a.iter().zip(d).map(|(&aj, &dj)| weighted_exp(dj, aj) + aj).sum()
}

/// `L_q(a; d; η)` for penalty `p` (centre must be resolved).
pub fn objective_lq(a: &[f64], d: &[f64], eta: f64, p: &PenaltySpec) -> Result<f64> {
    check_inputs(a, d, eta)?;
    let pen = if eta == 0.0 { 0.0 } else { eta * penalty_value(p, a)? };
    Ok(data_term(a, d) + pen)
}

/// `∇L_q`.
pub fn gradient_lq(a: &[f64], d: &[f64], eta: f64, p: &PenaltySpec) -> Result<Vec<f64>> {
    check_inputs(a, d, eta)?;
    let mut g: Vec<f64> = a.iter().zip(d).map(|(&aj, &dj)| 1.0 - weighted_exp(dj, aj)).collect();
    if eta != 0.0 {
        for (gj, pj) in g.iter_mut().zip(penalty_grad(p, a)?) {
            *gj += eta * pj;
        }
    }
    Ok(g)
}

/// `∇²L_q`.
pub fn hessian_lq(a: &[f64], d: &[f64], eta: f64, p: &PenaltySpec) -> Result<Array2<f64>> {
    check_inputs(a, d, eta)?;
    let mut h = if eta == 0.0 {
        Array2::zeros((a.len(), a.len()))
    } else {
        penalty_hess(p, a)? * eta
    };
    for j in 0..a.len() {
        h[[j, j]] += weighted_exp(d[j], a[j]);
    }
    Ok(h)
}

fn check_inputs(a: &[f64], d: &[f64], eta: f64) -> Result<()> {
    if a.len() != d.len() {
        return Err(Error::DimensionMismatch { expected: d.len(), actual: a.len() });
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput(format!("eta must be finite and >= 0, got {eta}")));
    }
    Ok(())
}

fn check_eigenvalues(d: &[f64]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::InvalidInput("no eigenvalues".into()));
    }
    if d.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidInput("eigenvalues must be finite and non-negative".into()));
    }
    if d.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("eigenvalues must be sorted descending".into()));
    }
    Ok(())
}

fn require_existence(d: &[f64], eta: f64) -> Result<()> {
    if eta == 0.0 && d.contains(&0.0) {
        return Err(Error::NoMinimum(
            "eta = 0 with a zero sample eigenvalue: the objective is unbounded below".into(),
        ));
    }
    Ok(())
}

/// Starting point `a_j = log max(d_j, 1e-8 · d̄)`.
pub fn initial_point(d: &[f64]) -> Vec<f64> {
    let dbar = d.iter().sum::<f64>() / d.len() as f64;
    if !(dbar > 0.0) {
        return vec![0.0; d.len()];
    }
    d.iter().map(|&x| x.max(1e-8 * dbar).ln()).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton loop. `direction(a, g)` returns the Newton direction for
/// iterate `a` with gradient `g`.
fn damped_newton(
    start: Vec<f64>,
    cfg: &SolverConfig,
    objective: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    mut direction: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mut a = start;
    let mut f = objective(&a);
    if !f.is_finite() {
        return Err(Error::Numerical(format!("objective is not finite at the start ({f})")));
    }
    let ls = cfg.line_search;
    for iter in 0..=cfg.max_iter {
        let g = gradient(&a);
        let gnorm = max_abs(&g);
        if gnorm <= cfg.grad_tol * f.abs().max(1.0) {
            // The test is relative to |L_q|, which additive constants can
            // inflate; one more Newton step costs little and is kept only
            // if it improves the gradient.
            let (mut a, mut f, mut gnorm, mut iterations) = (a, f, gnorm, iter);
            if gnorm > 0.0 {
                if let Ok(step) = direction(&a, &g) {
                    let trial: Vec<f64> = a.iter().zip(&step).map(|(x, s)| x + s).collect();
                    let ft = objective(&trial);
                    if ft.is_finite() && ft <= f + 8.0 * f64::EPSILON * f.abs().max(1.0) {
                        let gt = max_abs(&gradient(&trial));
                        if gt < gnorm {
                            (a, f, gnorm, iterations) = (trial, ft, gt, iter + 1);
                        }
                    }
                }
            }
            return Ok(SolveOutcome {
                a_hat: LogEigenvalues::new(a)?,
                iterations,
                final_grad_norm: gnorm,
                objective: f,
                converged: true,
            });
        }
        if iter == cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations: iter,
                grad_norm: gnorm,
                last_iterate: a,
            });
        }
        let step = direction(&a, &g)?;
        // With large η the gradient has a roundoff floor of order η·ε·|a|;
        // a Newton step below working precision means nothing more can move.
        if max_abs(&step) <= 4.0 * f64::EPSILON * max_abs(&a).max(1.0) {
            return Ok(SolveOutcome {
                a_hat: LogEigenvalues::new(a)?,
                iterations: iter,
                final_grad_norm: gnorm,
                objective: f,
                converged: true,
            });
        }
        let slope: f64 = g.iter().zip(&step).map(|(x, y)| x * y).sum();
        if !(slope < 0.0) {
            return Err(Error::Numerical(format!(
                "Newton direction is not a descent direction (slope {slope:e})"
            )));
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        let slack = 8.0 * f64::EPSILON * f.abs().max(1.0);
        for _ in 0..=ls.max_backtracks {
            let trial: Vec<f64> = a.iter().zip(&step).map(|(x, s)| x + alpha * s).collect();
            let ft = objective(&trial);
            if !ls.enabled || ft <= f + ls.armijo_c * alpha * slope + slack {
                if ft.is_finite() {
                    a = trial;
                    f = ft;
                    accepted = true;
                }
                break;
            }
            alpha *= ls.backtrack_factor;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: iter,
                grad_norm: gnorm,
                last_iterate: a,
            });
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Minimises `Σ_j d_j e^{−a_j} + a_j + η (a_j − c)²`, one coordinate at a
/// time: `a_j ← a_j + (d_j e^{−a_j} − 2η(a_j − c) − 1)/(d_j e^{−a_j} + 2η)`.
pub fn solve_percoordinate(d: &[f64], eta: f64, c: f64, cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_eigenvalues(d)?;
    check_inputs(d, d, eta)?;
    if !c.is_finite() {
        return Err(Error::InvalidInput("centre must be finite".into()));
    }
    require_existence(d, eta)?;
    let objective = |a: &[f64]| {
        a.iter()
            .zip(d)
            .map(|(&aj, &dj)| weighted_exp(dj, aj) + aj + eta * (aj - c) * (aj - c))
            .sum::<f64>()
    };
    let gradient = |a: &[f64]| {
        a.iter()
            .zip(d)
            .map(|(&aj, &dj)| 1.0 - weighted_exp(dj, aj) + 2.0 * eta * (aj - c))
            .collect::<Vec<f64>>()
    };
    let direction = |a: &[f64], _g: &[f64]| {
        Ok(a.iter()
            .zip(d)
            .map(|(&aj, &dj)| {
                let x = weighted_exp(dj, aj);
                (x - 2.0 * eta * (aj - c) - 1.0) / (x + 2.0 * eta)
            })
            .collect())
    };
    damped_newton(initial_point(d), cfg, objective, gradient, direction)
}

/// Newton quantities for the shape penalty at an iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonState {
    pub a: Vec<f64>,
    /// `g_j = d_j e^{−a_j} − 1 − 2η(a_j − ā)` (the negative gradient).
    pub g: Vec<f64>,
    /// `δ_j = d_j e^{−a_j} + 2η`.
    pub delta: Vec<f64>,
    /// `β = (2η/q) / (1 − (2η/q) Σ δ_j^{−1})`.
    pub beta: f64,
    pub objective: f64,
    pub iter: usize,
}

impl NewtonState {
    pub fn shape(d: &[f64], a: &[f64], eta: f64, iter: usize) -> Result<Self> {
        check_inputs(a, d, eta)?;
        let q = d.len() as f64;
        let c = centered(a);
        let x: Vec<f64> = a.iter().zip(d).map(|(&aj, &dj)| weighted_exp(dj, aj)).collect();
        let g: Vec<f64> = x.iter().zip(&c).map(|(xj, cj)| xj - 1.0 - 2.0 * eta * cj).collect();
        let delta: Vec<f64> = x.iter().map(|xj| xj + 2.0 * eta).collect();
        if delta.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::DegenerateHessian("a diagonal Hessian entry is zero".into()));
        }
        // 1 − (2η/q) Σ 1/δ_j rewritten as (1/q) Σ x_j/δ_j.
        let denom = x.iter().zip(&delta).map(|(xj, dj)| xj / dj).sum::<f64>() / q;
        if denom <= 1e-14 {
            return Err(Error::DegenerateHessian(format!(
                "rank-one correction denominator {denom:e} is not positive"
            )));
        }
        let beta = 2.0 * eta / q / denom;
        let objective = data_term(a, d) + eta * c.iter().map(|cj| cj * cj).sum::<f64>();
        Ok(Self {
            a: a.to_vec(),
            g,
            delta,
            beta,
            objective,
            iter,
        })
    }

    /// Newton step `s_j = (g_j + β Σ_k g_k/δ_k) / δ_j`.
    pub fn step(&self) -> Vec<f64> {
        let ratio: f64 = self.g.iter().zip(&self.delta).map(|(g, d)| g / d).sum();
        self.g
            .iter()
            .zip(&self.delta)
            .map(|(g, d)| (g + self.beta * ratio) / d)
            .collect()
    }
}

/// Minimises `Σ_j d_j e^{−a_j} + a_j + η (a_j − ā)²`.
pub fn solve_shape(d: &[f64], eta: f64, cfg: &SolverConfig) -> Result<SolveOutcome> {
    check_eigenvalues(d)?;
    check_inputs(d, d, eta)?;
    if !(d[0] > 0.0) {
        return Err(Error::InvalidInput("largest eigenvalue must be positive".into()));
    }
    require_existence(d, eta)?;
    let p = PenaltySpec::shape_log_frobenius();
    let objective = |a: &[f64]| objective_lq(a, d, eta, &p).unwrap_or(f64::NAN);
    let gradient = |a: &[f64]| gradient_lq(a, d, eta, &p).expect("validated inputs");
    let mut iter = 0usize;
    let direction = |a: &[f64], _g: &[f64]| {
        let state = NewtonState::shape(d, a, eta, iter)?;
        iter += 1;
        Ok(state.step())
    };
    damped_newton(initial_point(d), cfg, objective, gradient, direction)
}

/// Damped Newton for any smooth convex penalty with a resolved centre.
pub fn solve_generic(d: &[f64], eta: f64, p: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveOutcome> {
    solve_generic_from(d, eta, p, cfg, &initial_point(d))
}

/// [`solve_generic`] from a caller-supplied starting point.
pub fn solve_generic_from(
    d: &[f64],
    eta: f64,
    p: &PenaltySpec,
    cfg: &SolverConfig,
    start: &[f64],
) -> Result<SolveOutcome> {
    check_eigenvalues(d)?;
    check_inputs(start, d, eta)?;
    if !p.family().is_smooth() {
        return Err(Error::Configuration(format!(
            "penalty {} is not smooth and cannot be used by the Newton solver",
            p.family()
        )));
    }
    if p.needs_resolution() {
        return Err(Error::Configuration("penalty centre must be resolved before solving".into()));
    }
    if start.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("starting point must be finite".into()));
    }
    require_existence(d, eta)?;
    let objective = |a: &[f64]| objective_lq(a, d, eta, p).unwrap_or(f64::NAN);
    let gradient = |a: &[f64]| gradient_lq(a, d, eta, p).expect("validated inputs");
    let direction = |a: &[f64], g: &[f64]| {
        let h = hessian_lq(a, d, eta, p)?;
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        if let Some(s) = cholesky_solve(&h, &rhs) {
            return Ok(s);
        }
        // Full Hessian not positive definite: either the penalty is not
        // convex here or the sum is only semidefinite.
        let ph = SymmetricMatrix::new(penalty_hess(p, a)?)?;
        let pe = sym_eig(&ph)?;
        let scale = pe.largest().abs().max(1.0);
        if pe.smallest() < -1e-8 * scale {
            return Err(Error::ConvexityViolation { min_eigenvalue: pe.smallest() });
        }
        let mut ridged = h.clone();
        let bump = 1e-10 * h.diag().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for j in 0..a.len() {
            ridged[[j, j]] += bump;
        }
        cholesky_solve(&ridged, &rhs)
            .ok_or_else(|| Error::DegenerateHessian("Hessian singular even after ridge".into()))
    };
    damped_newton(start.to_vec(), cfg, objective, gradient, direction)
}
