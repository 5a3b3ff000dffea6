//! Two-class linear discriminant analysis with penalized pooled covariance,
//! evaluated over repeated random train/validation/test splits.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{default_grid, select_min, tune_with, EstimatorMethod, FitResult, PreparedSample};
use crate::io::fmt_num;
use crate::linalg::{sym_eig, zero_eigen_threshold, SymmetricMatrix};
use crate::simulation::{derive_seed, Summary};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    /// Index into `classes` for each row.
    pub labels: Vec<usize>,
    /// Class names in sorted order.
    pub classes: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, names: &[String]) -> Result<Self> {
        if features.nrows() != names.len() {
            return Err(Error::DimensionMismatch { expected: features.nrows(), actual: names.len() });
        }
        if features.nrows() < 2 || features.ncols() == 0 {
            return Err(Error::InvalidInput("dataset needs at least two rows and one feature".into()));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("features must be finite".into()));
        }
        let mut classes: Vec<String> = names.to_vec();
        classes.sort();
        classes.dedup();
        if classes.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "expected exactly two classes, found {}",
                classes.len()
            )));
        }
        let labels = names
            .iter()
            .map(|n| classes.binary_search(n).expect("name is a class"))
            .collect();
        Ok(Self { features, labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Skip the first line.
    pub header: bool,
    /// Required number of feature columns; `None` accepts any consistent width.
    pub features: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { header: false, features: Some(60) }
    }
}

/// Reads rows of numeric features followed by one label column.
pub fn read_dataset<R: Read>(input: R, opts: LoadOptions) -> Result<LabeledDataset> {
    let mut rows: Vec<f64> = Vec::new();
    let mut names = Vec::new();
    let mut width: Option<usize> = opts.features;
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if (i == 0 && opts.header) || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let nf = fields.len() - 1;
        let w = *width.get_or_insert(nf);
        if nf != w || nf == 0 {
            return Err(Error::Malformed(format!(
                "line {}: {} feature columns, expected {w}",
                i + 1,
                nf
            )));
        }
        for f in &fields[..nf] {
            rows.push(
                f.parse()
                    .map_err(|_| Error::Malformed(format!("line {}: non-numeric feature '{f}'", i + 1)))?,
            );
        }
        let label = fields[nf];
        if label.is_empty() {
            return Err(Error::Malformed(format!("line {}: empty label", i + 1)));
        }
        names.push(label.to_string());
    }
    let q = width.unwrap_or(0);
    if names.is_empty() {
        return Err(Error::Malformed("no data rows".into()));
    }
    let features = Array2::from_shape_vec((names.len(), q), rows).map_err(|e| Error::Malformed(e.to_string()))?;
    LabeledDataset::new(features, &names)
}

pub fn load_dataset(path: &Path, opts: LoadOptions) -> Result<LabeledDataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dataset(f, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PoolingDivisor {
    /// Total subset size (maximum likelihood).
    #[default]
    Total,
    /// Subset size minus the number of classes.
    Unbiased,
}

fn class_means(data: &LabeledDataset, subset: &[usize]) -> Result<(Vec<Array1<f64>>, Vec<usize>)> {
    let k = data.classes.len();
    let mut sums = vec![Array1::<f64>::zeros(data.dim()); k];
    let mut counts = vec![0usize; k];
    for &i in subset {
        let l = *data
            .labels
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("row index {i} out of range")))?;
        sums[l] += &data.features.row(i);
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!("class {} is absent from the subset", data.classes[c])));
    }
    let means = sums.into_iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    Ok((means, counts))
}

/// Within-class centred scatter of `subset`, summed over classes and
/// divided per `divisor`.
pub fn pooled_cov(data: &LabeledDataset, subset: &[usize], divisor: PoolingDivisor) -> Result<SymmetricMatrix> {
    let (means, _) = class_means(data, subset)?;
    let q = data.dim();
    let mut centred = Array2::<f64>::zeros((subset.len(), q));
    for (r, &i) in subset.iter().enumerate() {
        let row = &data.features.row(i) - &means[data.labels[i]];
        centred.row_mut(r).assign(&row);
    }
    let denom = match divisor {
        PoolingDivisor::Total => subset.len() as f64,
        PoolingDivisor::Unbiased => subset.len() as f64 - data.classes.len() as f64,
    };
    if !(denom > 0.0) {
        return Err(Error::InvalidInput("subset too small for the pooling divisor".into()));
    }
    Ok(SymmetricMatrix::symmetrized(centred.t().dot(&centred) / denom))
}

/// Linear discriminants `xᵀΣ⁻¹μ_k − ½μ_kᵀΣ⁻¹μ_k + log π_k`.
#[derive(Debug, Clone)]
pub struct LdaModel {
    weights: Vec<Array1<f64>>,
    offsets: Vec<f64>,
}

impl LdaModel {
    /// From `Σ̂ = P diag(λ) Pᵀ`.
    pub fn from_spectral(
        vectors: &Array2<f64>,
        eigenvalues: &[f64],
        means: &[Array1<f64>],
        priors: &[f64],
    ) -> Result<Self> {
        if means.len() != priors.len() || means.is_empty() {
            return Err(Error::InvalidInput("need one prior per class mean".into()));
        }
        if priors.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidInput("priors must be positive".into()));
        }
        let lmax = eigenvalues[0];
        let lmin = *eigenvalues.last().expect("q >= 1");
        if !(lmax > 0.0) || lmin <= zero_eigen_threshold(lmax) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: lmin });
        }
        let inv = Array1::from_iter(eigenvalues.iter().map(|l| 1.0 / l));
        let mut weights = Vec::with_capacity(means.len());
        let mut offsets = Vec::with_capacity(means.len());
        for (mu, &p) in means.iter().zip(priors) {
            if mu.len() != vectors.nrows() {
                return Err(Error::DimensionMismatch { expected: vectors.nrows(), actual: mu.len() });
            }
            let w = vectors.dot(&(&vectors.t().dot(mu) * &inv));
            offsets.push(-0.5 * mu.dot(&w) + p.ln());
            weights.push(w);
        }
        Ok(Self { weights, offsets })
    }

    pub fn new(sigma_hat: &SymmetricMatrix, means: &[Array1<f64>], priors: &[f64]) -> Result<Self> {
        let eig = sym_eig(sigma_hat)?;
        Self::from_spectral(eig.vectors(), eig.values().as_slice().expect("contiguous"), means, priors)
    }

    pub fn scores(&self, x: ArrayView1<f64>) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, o)| x.dot(w) + o)
            .collect()
    }

    /// Class with the largest discriminant; ties go to the first.
    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        let s = self.scores(x);
        let mut best = 0;
        for (k, v) in s.iter().enumerate().skip(1) {
            if *v > s[best] {
                best = k;
            }
        }
        best
    }

    /// Fraction of `subset` rows misclassified.
    pub fn error_rate(&self, data: &LabeledDataset, subset: &[usize]) -> f64 {
        let wrong = subset
            .iter()
            .filter(|&&i| self.predict(data.features.row(i)) != data.labels[i])
            .count();
        wrong as f64 / subset.len() as f64
    }
}

pub fn lda_predict(
    sigma_hat: &SymmetricMatrix,
    means: &[Array1<f64>],
    priors: &[f64],
    x: ArrayView1<f64>,
) -> Result<usize> {
    if x.len() != sigma_hat.dim() {
        return Err(Error::DimensionMismatch { expected: sigma_hat.dim(), actual: x.len() });
    }
    Ok(LdaModel::new(sigma_hat, means, priors)?.predict(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TuningCriterion {
    /// Misclassification rate on the validation split.
    #[default]
    ValidationError,
    /// Gaussian loss against the validation split's pooled covariance.
    ValidationGaussLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub reps: usize,
    pub methods: Vec<EstimatorMethod>,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub tuning_criterion: TuningCriterion,
    pub pooling: PoolingDivisor,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            train: 78,
            validation: 78,
            test: 52,
            reps: 100,
            methods: EstimatorMethod::BUILT_IN.to_vec(),
            seed: 1,
            grid: default_grid(),
            tuning_criterion: TuningCriterion::default(),
            pooling: PoolingDivisor::default(),
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train + self.validation + self.test != n {
            return Err(Error::Configuration(format!(
                "split sizes {}+{}+{} do not sum to n = {n}",
                self.train, self.validation, self.test
            )));
        }
        if self.train == 0 || self.test == 0 || self.reps == 0 || self.methods.is_empty() {
            return Err(Error::Configuration("train, test, reps and methods must be nonempty".into()));
        }
        if self.methods.iter().any(EstimatorMethod::is_penalized) && self.validation == 0 {
            return Err(Error::Configuration("penalized methods need a validation split".into()));
        }
        if self.grid.is_empty() || self.grid.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::Configuration("grid must be nonempty with finite values >= 0".into()));
        }
        Ok(())
    }
}

/// Disjoint train/validation/test index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn random_split(n: usize, cfg: &ClassifyConfig, rep: usize) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, &[rep as u64])));
    let (a, b) = (cfg.train, cfg.train + cfg.validation);
    Split {
        train: idx[..a].to_vec(),
        validation: idx[a..b].to_vec(),
        test: idx[b..].to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub rep: usize,
    /// Test error per method; `None` where that method failed.
    pub errors: Vec<Option<f64>>,
    pub etas: Vec<Option<f64>>,
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: EstimatorMethod,
    pub error: Option<Summary>,
    pub eta: Option<Summary>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub config: ClassifyConfig,
    pub class_counts: BTreeMap<String, usize>,
    pub methods: Vec<MethodSummary>,
    /// `wins[i][j]`: replicates where method `i` had strictly lower test error than `j`.
    pub wins: Vec<Vec<usize>>,
    /// `ties[i][j]`: replicates where both errors are equal (diagonal left at 0).
    pub ties: Vec<Vec<usize>>,
    pub reps: Vec<RepResult>,
}

impl ClassificationReport {
    pub fn summary(&self, method_id: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method.id() == method_id)
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "mean_error", "sd_error", "count", "mean_eta", "sd_eta", "failures"])?;
        for m in &self.methods {
            let (me, se, c) = match m.error {
                Some(s) => (fmt_num(s.mean), fmt_num(s.sd), s.count.to_string()),
                None => ("NA".into(), "NA".into(), "0".into()),
            };
            let (mh, sh) = match m.eta {
                Some(s) => (fmt_num(s.mean), fmt_num(s.sd)),
                None => ("NA".into(), "NA".into()),
            };
            w.write_record([m.method.id().to_string(), me, se, c, mh, sh, m.failures.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Square table of `wins` with method ids as header and first column.
    pub fn write_frequency_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ids: Vec<String> = self.methods.iter().map(|m| m.method.id().to_string()).collect();
        let mut header = vec![String::new()];
        header.extend(ids.iter().cloned());
        w.write_record(&header)?;
        for (i, row) in self.wins.iter().enumerate() {
            let mut rec = vec![ids[i].clone()];
            rec.extend(row.iter().map(|c| c.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn priors(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn lda_from_fit(fit: &FitResult, means: &[Array1<f64>], priors: &[f64]) -> Result<LdaModel> {
    LdaModel::from_spectral(&fit.eigenvectors, &fit.eigenvalues, means, priors)
}

#[allow(clippy::too_many_arguments)]
fn run_method(
    data: &LabeledDataset,
    cfg: &ClassifyConfig,
    split: &Split,
    train: &PreparedSample,
    means: &[Array1<f64>],
    pri: &[f64],
    method: &EstimatorMethod,
    solver: &SolverConfig,
) -> Result<(f64, Option<f64>)> {
    let (fit, eta) = if !method.is_penalized() {
        (train.fit(method, 0.0, solver)?, None)
    } else {
        match cfg.tuning_criterion {
            TuningCriterion::ValidationGaussLoss => {
                let s_valid = pooled_cov(data, &split.validation, cfg.pooling)?;
                let t = tune_with(method, train, &s_valid, &cfg.grid, solver)?;
                (t.fit, Some(t.selected_eta))
            }
            TuningCriterion::ValidationError => {
                let mut fits = Vec::with_capacity(cfg.grid.len());
                let mut errs = Vec::with_capacity(cfg.grid.len());
                let mut failures = Vec::new();
                for &eta in &cfg.grid {
                    match train.fit(method, eta, solver).and_then(|f| {
                        let e = lda_from_fit(&f, means, pri)?.error_rate(data, &split.validation);
                        Ok((f, e))
                    }) {
                        Ok((f, e)) => {
                            fits.push(Some(f));
                            errs.push(Some(e));
                        }
                        Err(e) => {
                            failures.push((eta, e.to_string()));
                            fits.push(None);
                            errs.push(None);
                        }
                    }
                }
                let best = select_min(&cfg.grid, &errs).ok_or(Error::TuningFailure { failures })?;
                (fits.swap_remove(best).expect("selected fit exists"), Some(cfg.grid[best]))
            }
        }
    };
    let err = lda_from_fit(&fit, means, pri)?.error_rate(data, &split.test);
    Ok((err, eta))
}

fn run_rep(data: &LabeledDataset, cfg: &ClassifyConfig, rep: usize, solver: &SolverConfig) -> RepResult {
    let split = random_split(data.len(), cfg, rep);
    let k = cfg.methods.len();
    let prepared = (|| -> Result<_> {
        let (means, counts) = class_means(data, &split.train)?;
        let s = pooled_cov(data, &split.train, cfg.pooling)?;
        Ok((means, priors(&counts), PreparedSample::new(&s)?))
    })();
    let (means, pri, train) = match prepared {
        Ok(p) => p,
        Err(e) => {
            return RepResult {
                rep,
                errors: vec![None; k],
                etas: vec![None; k],
                failures: (0..k).map(|m| (m, e.to_string())).collect(),
            }
        }
    };
    let mut out = RepResult { rep, errors: Vec::new(), etas: Vec::new(), failures: Vec::new() };
    for (mi, m) in cfg.methods.iter().enumerate() {
        match run_method(data, cfg, &split, &train, &means, &pri, m, solver) {
            Ok((e, eta)) => {
                out.errors.push(Some(e));
                out.etas.push(eta);
            }
            Err(e) => {
                out.errors.push(None);
                out.etas.push(None);
                out.failures.push((mi, e.to_string()));
            }
        }
    }
    out
}

/// Repeats split, tune, fit and test for `cfg.reps` replicates.
pub fn run_classification(data: &LabeledDataset, cfg: &ClassifyConfig) -> Result<ClassificationReport> {
    cfg.validate(data.len())?;
    let solver = SolverConfig::default();
    let reps: Vec<RepResult> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_rep(data, cfg, r, &solver))
        .collect();
    let k = cfg.methods.len();
    let mut wins = vec![vec![0usize; k]; k];
    let mut ties = vec![vec![0usize; k]; k];
    for r in &reps {
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                if let (Some(a), Some(b)) = (r.errors[i], r.errors[j]) {
                    if a < b {
                        wins[i][j] += 1;
                    } else if a == b {
                        ties[i][j] += 1;
                    }
                }
            }
        }
    }
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let errs: Vec<f64> = reps.iter().filter_map(|r| r.errors[i]).collect();
            let etas: Vec<f64> = reps.iter().filter_map(|r| r.etas[i]).collect();
            MethodSummary {
                method: m.clone(),
                error: Summary::of(&errs),
                eta: Summary::of(&etas),
                failures: cfg.reps - errs.len(),
            }
        })
        .collect();
    let class_counts = data.classes.iter().cloned().zip(data.class_counts()).collect();
    Ok(ClassificationReport { config: cfg.clone(), class_counts, methods, wins, ties, reps })
}

/// Column means of the rows in `subset`.
pub fn subset_mean(data: &LabeledDataset, subset: &[usize]) -> Array1<f64> {
    data.features.select(Axis(0), subset).mean_axis(Axis(0)).expect("nonempty subset")
}
