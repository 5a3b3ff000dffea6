//! Covariance models 1–4, Gaussian sampling and the train/validate/score
//! Monte Carlo protocol.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{default_grid, sample_cov, tune_with, EstimatorMethod, PreparedSample};
use crate::io::fmt_num;
use crate::linalg::{commutator_norm, matrix_norm, sym_eig, zero_eigen_threshold, NormKind, SymmetricMatrix};
use crate::metrics::{discrepancy, DiscrepancyReport};
use crate::solver::SolverConfig;

/// Name of the normal generator recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9) + ziggurat StandardNormal (rand_distr 0.5)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ModelId {
    /// MA(2): `σ_ii = 10`, first off-diagonal 0.1, second 0.05.
    Ma2 = 1,
    /// AR(1): `σ_ij = 0.5 · 0.3^{|i−j|}`.
    Ar1 = 2,
    /// Inverse of the compound-symmetry matrix with unit diagonal and 0.6 elsewhere.
    InverseCompound = 3,
    /// `5 I`.
    ScaledIdentity = 4,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [Self::Ma2, Self::Ar1, Self::InverseCompound, Self::ScaledIdentity];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Published eigenvalue mean and standard deviation.
    pub fn reference_stats(self) -> (f64, f64) {
        match self {
            Self::Ma2 => (10.0, 1.16),
            Self::Ar1 => (0.5, 0.22),
            Self::InverseCompound => (2.46, 0.32),
            Self::ScaledIdentity => (5.0, 0.0),
        }
    }
}

impl TryFrom<u8> for ModelId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::Ma2),
            2 => Ok(Self::Ar1),
            3 => Ok(Self::InverseCompound),
            4 => Ok(Self::ScaledIdentity),
            _ => Err(Error::Configuration(format!("unknown model {v} (expected 1-4)"))),
        }
    }
}

impl From<ModelId> for u8 {
    fn from(m: ModelId) -> u8 {
        m.number()
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::Configuration(format!("model must be 1-4, got '{s}'")))?;
        Self::try_from(v)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// True covariance of `model` in dimension `q`.
pub fn model_sigma(model: ModelId, q: usize) -> Result<SymmetricMatrix> {
    if q == 0 {
        return Err(Error::Configuration("dimension must be positive".into()));
    }
    Ok(match model {
        ModelId::Ma2 => SymmetricMatrix::from_fn(q, |i, j| match j - i {
            0 => 10.0,
            1 => 0.1,
            2 => 0.05,
            _ => 0.0,
        }),
        ModelId::Ar1 => SymmetricMatrix::from_fn(q, |i, j| 0.5 * 0.3f64.powi((j - i) as i32)),
        ModelId::InverseCompound => {
            let inv = SymmetricMatrix::from_fn(q, |i, j| if i == j { 1.0 } else { 0.6 });
            sym_eig(&inv)?.map(|x| 1.0 / x)
        }
        ModelId::ScaledIdentity => SymmetricMatrix::identity(q).scale(5.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenStats {
    pub mean: f64,
    /// Population standard deviation (divisor `q`).
    pub sd: f64,
    pub reference_mean: f64,
    pub reference_sd: f64,
    /// Computed standard deviation differs from the published one by more than 0.01.
    pub sd_mismatch: bool,
}

pub fn model_eigen_stats(model: ModelId, q: usize) -> Result<EigenStats> {
    let eig = sym_eig(&model_sigma(model, q)?)?;
    let v = eig.values();
    let mean = v.mean().expect("q >= 1");
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / q as f64).sqrt();
    let (reference_mean, reference_sd) = model.reference_stats();
    Ok(EigenStats {
        mean,
        sd,
        reference_mean,
        reference_sd,
        sd_mismatch: (sd - reference_sd).abs() > 0.01,
    })
}

/// Draws rows from `N(0, Σ)` as `L z` with `L = P diag(√λ)`.
#[derive(Debug, Clone)]
pub struct MvnSampler {
    root: Array2<f64>,
}

impl MvnSampler {
    pub fn new(sigma: &SymmetricMatrix) -> Result<Self> {
        let eig = sym_eig(sigma)?;
        let lmax = eig.largest().max(0.0);
        let thr = zero_eigen_threshold(lmax).max(1e-10 * lmax);
        if eig.smallest() < -thr {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: eig.smallest() });
        }
        let mut root = eig.vectors().clone();
        for (j, &l) in eig.values().iter().enumerate() {
            root.column_mut(j).mapv_inplace(|x| x * l.max(0.0).sqrt());
        }
        Ok(Self { root })
    }

    pub fn dim(&self) -> usize {
        self.root.nrows()
    }

    /// `n × q` sample; normals are drawn row by row.
    pub fn sample(&self, n: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
        let q = self.dim();
        let z = Array2::from_shape_simple_fn((n, q), || StandardNormal.sample(rng));
        z.dot(&self.root.t())
    }
}

/// `n` rows from `N(0, Σ)` with a generator seeded by `seed`.
pub fn mvn_sample(sigma: &SymmetricMatrix, n: usize, seed: u64) -> Result<Array2<f64>> {
    let sampler = MvnSampler::new(sigma)?;
    Ok(sampler.sample(n, &mut ChaCha20Rng::seed_from_u64(seed)))
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one stream, derived from the base seed and a list of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(seed), |acc, &l| {
        mix64(acc ^ mix64(l.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub models: Vec<ModelId>,
    pub q: usize,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<EstimatorMethod>,
    pub seed: u64,
    pub grid: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            models: ModelId::ALL.to_vec(),
            q: 60,
            n_values: vec![120, 60, 30],
            reps: 100,
            methods: EstimatorMethod::BUILT_IN.to_vec(),
            seed: 1,
            grid: default_grid(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Configuration(m.to_string()));
        if self.reps == 0 {
            return bad("reps must be >= 1");
        }
        if self.q < 2 {
            return bad("q must be >= 2");
        }
        if self.models.is_empty() || self.n_values.is_empty() || self.methods.is_empty() {
            return bad("models, n values and methods must be nonempty");
        }
        if self.n_values.contains(&0) {
            return bad("n must be >= 1");
        }
        if self.grid.is_empty() || self.grid.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("grid must be nonempty with finite values >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (divisor `count − 1`; 0 for one value).
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    /// Summary of `values` in the given order; `None` when empty.
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, count: n })
    }
}

/// Outcome of one method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: usize,
    pub discrepancy: DiscrepancyReport,
    pub eta: Option<f64>,
    /// `‖Σ̂S − SΣ̂‖_F / (‖S‖_F ‖Σ̂‖_F)` against the training covariance.
    pub relative_commutator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub model: ModelId,
    pub n: usize,
    pub method: EstimatorMethod,
    pub fnorm: Option<Summary>,
    pub l1: Option<Summary>,
    pub opnorm: Option<Summary>,
    pub delta1: Option<Summary>,
    /// Absent for method `S`.
    pub eta: Option<Summary>,
    pub max_relative_commutator: f64,
    pub failures: Vec<(usize, String)>,
}

impl CellReport {
    pub fn measure(&self, name: &str) -> Option<Summary> {
        match name {
            "fnorm" => self.fnorm,
            "l1" => self.l1,
            "opnorm" => self.opnorm,
            "delta1" => self.delta1,
            "eta" => self.eta,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub rng: String,
    pub model_stats: Vec<(ModelId, EigenStats)>,
    pub cells: Vec<CellReport>,
}

impl SimulationReport {
    pub fn cell(&self, model: ModelId, n: usize, method_id: &str) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.n == n && c.method.id() == method_id)
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures.len()).sum()
    }

    /// One row per (model, n, method, measure); `eta` is `NA` for `S`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "n", "method", "measure", "mean", "sd", "count"])?;
        for c in &self.cells {
            for name in ["fnorm", "l1", "opnorm", "delta1", "eta"] {
                let (mean, sd, count) = match c.measure(name) {
                    Some(s) => (fmt_num(s.mean), fmt_num(s.sd), s.count.to_string()),
                    None => ("NA".into(), "NA".into(), "0".into()),
                };
                w.write_record([
                    c.model.to_string(),
                    c.n.to_string(),
                    c.method.id().to_string(),
                    name.to_string(),
                    mean,
                    sd,
                    count,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct RepTask {
    model: ModelId,
    n: usize,
    rep: usize,
}

fn run_rep(
    cfg: &SimConfig,
    sigma: &SymmetricMatrix,
    sampler: &MvnSampler,
    task: &RepTask,
    solver: &SolverConfig,
) -> Vec<std::result::Result<RepOutcome, String>> {
    let seed = derive_seed(cfg.seed, &[task.model.number() as u64, task.n as u64, task.rep as u64]);
    let x = sampler.sample(2 * task.n, &mut ChaCha20Rng::seed_from_u64(seed));
    let n = task.n;
    let prepared = (|| -> Result<(SymmetricMatrix, SymmetricMatrix, PreparedSample)> {
        let train = sample_cov(&x.slice(ndarray::s![..n, ..]).to_owned(), false)?;
        let valid = sample_cov(&x.slice(ndarray::s![n.., ..]).to_owned(), false)?;
        let prep = PreparedSample::new(&train)?;
        Ok((train, valid, prep))
    })();
    let (train, valid, prep) = match prepared {
        Ok(p) => p,
        Err(e) => return cfg.methods.iter().map(|_| Err(e.to_string())).collect(),
    };
    cfg.methods
        .iter()
        .map(|m| {
            let (fit, eta) = if m.is_penalized() {
                let t = tune_with(m, &prep, &valid, &cfg.grid, solver).map_err(|e| e.to_string())?;
                (t.fit, Some(t.selected_eta))
            } else {
                (prep.fit(m, 0.0, solver).map_err(|e| e.to_string())?, None)
            };
            let hat = fit.sigma_hat();
            let d = discrepancy(&hat, sigma).map_err(|e| e.to_string())?;
            let scale = matrix_norm(&train, NormKind::Frobenius).map_err(|e| e.to_string())?
                * matrix_norm(&hat, NormKind::Frobenius).map_err(|e| e.to_string())?;
            let comm = commutator_norm(&hat, &train).map_err(|e| e.to_string())?;
            Ok(RepOutcome {
                rep: task.rep,
                discrepancy: d,
                eta,
                relative_commutator: if scale > 0.0 { comm / scale } else { 0.0 },
            })
        })
        .collect()
}

/// Runs every (model, n, method) cell for `cfg.reps` replicates. Replicates
/// run in parallel on the current rayon pool; each has its own generator so
/// the report does not depend on scheduling.
pub fn run_protocol(cfg: &SimConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let solver = SolverConfig::default();
    let mut model_stats = Vec::new();
    let mut cells = Vec::new();
    for &model in &cfg.models {
        let sigma = model_sigma(model, cfg.q)?;
        let sampler = MvnSampler::new(&sigma)?;
        model_stats.push((model, model_eigen_stats(model, cfg.q)?));
        for &n in &cfg.n_values {
            let tasks: Vec<RepTask> = (0..cfg.reps).map(|rep| RepTask { model, n, rep }).collect();
            let results: Vec<_> = tasks
                .par_iter()
                .map(|t| run_rep(cfg, &sigma, &sampler, t, &solver))
                .collect();
            for (k, method) in cfg.methods.iter().enumerate() {
                let mut ok = Vec::new();
                let mut failures = Vec::new();
                for (rep, r) in results.iter().enumerate() {
                    match &r[k] {
                        Ok(o) => ok.push(o),
                        Err(e) => failures.push((rep, e.clone())),
                    }
                }
                let col = |f: fn(&RepOutcome) -> f64| Summary::of(&ok.iter().map(|o| f(o)).collect::<Vec<_>>());
                let etas: Vec<f64> = ok.iter().filter_map(|o| o.eta).collect();
                cells.push(CellReport {
                    model,
                    n,
                    method: method.clone(),
                    fnorm: col(|o| o.discrepancy.fnorm),
                    l1: col(|o| o.discrepancy.l1),
                    opnorm: col(|o| o.discrepancy.opnorm),
                    delta1: col(|o| o.discrepancy.delta1),
                    eta: if method.is_penalized() { Summary::of(&etas) } else { None },
                    max_relative_commutator: ok.iter().map(|o| o.relative_commutator).fold(0.0, f64::max),
                    failures,
                });
            }
        }
    }
    Ok(SimulationReport {
        config: cfg.clone(),
        rng: RNG_ALGORITHM.to_string(),
        model_stats,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_matrices() {
        let m1 = model_sigma(ModelId::Ma2, 5).unwrap();
        assert_eq!(m1.get(0, 0), 10.0);
        assert_eq!(m1.get(1, 0), 0.1);
        assert_eq!(m1.get(3, 1), 0.05);
        assert_eq!(m1.get(4, 0), 0.0);
        let m2 = model_sigma(ModelId::Ar1, 60).unwrap();
        assert!((m2.trace() / 60.0 - 0.5).abs() < 1e-15);
        assert!((m2.get(0, 2) - 0.5 * 0.09).abs() < 1e-15);
        let m4 = model_sigma(ModelId::ScaledIdentity, 60).unwrap();
        assert_eq!(m4, SymmetricMatrix::identity(60).scale(5.0));
    }

    #[test]
    fn model_three_inverts_compound_symmetry() {
        let q = 6;
        let s = model_sigma(ModelId::InverseCompound, q).unwrap();
        let inv = SymmetricMatrix::from_fn(q, |i, j| if i == j { 1.0 } else { 0.6 });
        let prod = s.matmul(&inv);
        for i in 0..q {
            for j in 0..q {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_statistics() {
        // compound symmetry 1, 0.6 has eigenvalues 0.4 (×59) and 1 + 59·0.6
        let hi: f64 = 1.0 / 0.4;
        let lo: f64 = 1.0 / 36.4;
        let mean = (59.0 * hi + lo) / 60.0;
        let sd = ((59.0 * (hi - mean) * (hi - mean) + (lo - mean) * (lo - mean)) / 60.0).sqrt();
        let st = model_eigen_stats(ModelId::InverseCompound, 60).unwrap();
        assert!((st.mean - mean).abs() < 1e-12);
        assert!((st.sd - sd).abs() < 1e-12);
        assert!(!st.sd_mismatch);
        let st = model_eigen_stats(ModelId::ScaledIdentity, 60).unwrap();
        assert_eq!((st.mean, st.sd), (5.0, 0.0));
        let st = model_eigen_stats(ModelId::Ma2, 60).unwrap();
        assert!((st.mean - 10.0).abs() < 1e-12);
        assert!(st.sd_mismatch);
    }

    #[test]
    fn sampler_determinism_and_zero() {
        let s = SymmetricMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(mvn_sample(&s, 7, 42).unwrap(), mvn_sample(&s, 7, 42).unwrap());
        assert_ne!(mvn_sample(&s, 7, 42).unwrap(), mvn_sample(&s, 7, 43).unwrap());
        let z = mvn_sample(&SymmetricMatrix::zeros(3), 4, 1).unwrap();
        assert!(z.iter().all(|&x| x == 0.0));
        assert!(mvn_sample(&SymmetricMatrix::from_diag(&[1.0, -1.0]), 2, 1).is_err());
    }

    #[test]
    fn sampler_covariance() {
        let x = mvn_sample(&SymmetricMatrix::identity(2), 100_000, 7).unwrap();
        let s = sample_cov(&x, false).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s.get(i, j) - e).abs() < 0.02);
            }
        }
    }

    #[test]
    fn seeds_differ_by_label() {
        let a = derive_seed(1, &[2, 120, 0]);
        assert_ne!(a, derive_seed(1, &[2, 120, 1]));
        assert_ne!(a, derive_seed(1, &[2, 60, 0]));
        assert_ne!(a, derive_seed(2, &[2, 120, 0]));
        assert_eq!(a, derive_seed(1, &[2, 120, 0]));
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.sd, s.count), (2.0, 1.0, 3));
        assert_eq!(Summary::of(&[4.0]).unwrap().sd, 0.0);
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn single_rep_sample_covariance() {
        let cfg = SimConfig {
            models: vec![ModelId::ScaledIdentity],
            q: 4,
            n_values: vec![10],
            reps: 1,
            methods: vec![EstimatorMethod::S],
            seed: 9,
            grid: vec![0.0],
        };
        let rep = run_protocol(&cfg).unwrap();
        let cell = rep.cell(ModelId::ScaledIdentity, 10, "S").unwrap();
        let seed = derive_seed(9, &[4, 10, 0]);
        let sigma = model_sigma(ModelId::ScaledIdentity, 4).unwrap();
        let x = MvnSampler::new(&sigma).unwrap().sample(20, &mut ChaCha20Rng::seed_from_u64(seed));
        let s = sample_cov(&x.slice(ndarray::s![..10, ..]).to_owned(), false).unwrap();
        let d = discrepancy(&s, &sigma).unwrap();
        assert_eq!(cell.fnorm.unwrap().mean, d.fnorm);
        assert_eq!(cell.fnorm.unwrap().sd, 0.0);
        assert!(cell.eta.is_none());
    }

    #[test]
    fn csv_layout() {
        let cfg = SimConfig {
            models: vec![ModelId::Ar1],
            q: 3,
            n_values: vec![8],
            reps: 2,
            methods: vec![EstimatorMethod::S, EstimatorMethod::SLogF],
            seed: 3,
            grid: vec![0.0, 1.0],
        };
        let rep = run_protocol(&cfg).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "model,n,method,measure,mean,sd,count");
        assert_eq!(lines.len(), 1 + 2 * 5);
        assert!(lines.contains(&"2,8,S,eta,NA,NA,0"));
    }
}
