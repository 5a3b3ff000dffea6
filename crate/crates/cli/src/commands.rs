use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use logshrink::classify::{load_dataset, LoadOptions, PoolingDivisor, TuningCriterion};
use logshrink::estimator::PreparedSample;
use logshrink::io::{read_matrix_file, read_table_file, write_matrix};
use logshrink::verify::{run_suite, SuiteConfig};
use logshrink::{
    run_classification, run_protocol, sample_cov, ClassifyConfig, EstimatorMethod, Error, Result, SimConfig,
    SimulationReport, SolverConfig, SymmetricMatrix,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    Centering, ClassifyArgs, Cli, Command, CovInput, Criterion, FitArgs, Pooling, SimulateArgs, TuneArgs,
    VerifyArgs,
};
use crate::metadata::RunMetadata;

pub fn dispatch(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Configuration("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Configuration(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Fit(a) => fit(a),
        Command::Tune(a) => tune(a),
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify(a),
        Command::Verify(a) => verify(a),
    })
}

fn load_cov(input: &CovInput, centering: &Centering) -> Result<SymmetricMatrix> {
    match (&input.cov, &input.data) {
        (Some(p), _) => read_matrix_file(p),
        (None, Some(p)) => sample_cov(&read_table_file(p)?, centering.centered()),
        (None, None) => Err(Error::Configuration("need --cov or --data".into())),
    }
}

fn with_bias(method: EstimatorMethod, bias: f64) -> EstimatorMethod {
    match method {
        EstimatorMethod::MLogF { .. } => EstimatorMethod::MLogF { bias },
        m => m,
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_sigma(dir: &Path, sigma: &SymmetricMatrix) -> Result<()> {
    let mut w = create(dir, "sigma_hat.csv")?;
    write_matrix(&mut w, sigma)?;
    w.flush()?;
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let s = load_cov(&a.input, &a.centering)?;
    let method = with_bias(a.method, a.bias);
    let prepared = PreparedSample::new(&s)?;
    let result = prepared.fit(&method, a.eta, &SolverConfig::default())?;
    write_sigma(&a.out, &result.sigma_hat())?;
    let meta = RunMetadata::new("fit", json!({ "method": method, "eta": a.eta, "centered": a.centering.centered() }), None, None);
    write_json(&a.out, "fit.json", &json!({ "metadata": meta, "fit": result }))?;
    println!("{} eta={} q={} iterations={}", method, a.eta, result.dim(),
        result.diagnostics.as_ref().map_or(0, |d| d.iterations));
    Ok(())
}

fn tune(a: TuneArgs) -> Result<()> {
    let s_train = load_cov(&a.input, &a.centering)?;
    let s_valid = match (&a.valid_cov, &a.valid_data) {
        (Some(p), _) => read_matrix_file(p)?,
        (None, Some(p)) => sample_cov(&read_table_file(p)?, a.centering.centered())?,
        (None, None) => return Err(Error::Configuration("need --valid-cov or --valid-data".into())),
    };
    let method = with_bias(a.method, a.bias);
    let grid = a.grid.values()?;
    let prepared = PreparedSample::new(&s_train)?;
    let result = logshrink::estimator::tune_with(&method, &prepared, &s_valid, &grid, &SolverConfig::default())?;
    write_sigma(&a.out, &result.fit.sigma_hat())?;
    let meta = RunMetadata::new("tune", json!({ "method": method, "grid": a.grid }), None, Some(grid));
    write_json(&a.out, "tune.json", &json!({ "metadata": meta, "tune": result }))?;
    println!("{} selected eta={} validation loss={:.6}", method, result.selected_eta, result.selected_loss);
    Ok(())
}

fn sim_config(a: &SimulateArgs) -> Result<SimConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_reader(File::open(p)?)?,
        None => SimConfig::default(),
    };
    if !a.model.is_empty() {
        cfg.models = a.model.clone();
    }
    if !a.n.is_empty() {
        cfg.n_values = a.n.clone();
    }
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if !a.methods.is_empty() {
        cfg.methods = a.methods.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(g) = a.grid {
        cfg.grid = g.values()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_sim_table(report: &SimulationReport) {
    println!("{:>5} {:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "model", "n", "method", "fnorm", "l1", "opnorm", "delta1", "eta");
    let cell = |s: Option<logshrink::simulation::Summary>| match s {
        Some(s) => format!("{:.2}({:.2})", s.mean, s.sd),
        None => "NA".to_string(),
    };
    for c in &report.cells {
        println!(
            "{:>5} {:>5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
            c.model.number(), c.n, c.method.id(), cell(c.fnorm), cell(c.l1), cell(c.opnorm), cell(c.delta1), cell(c.eta)
        );
    }
    let failures = report.total_failures();
    if failures > 0 {
        println!("{failures} replicate fits failed; see simulation.json");
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = sim_config(&a)?;
    let report = run_protocol(&cfg)?;
    let mut w = create(&a.out, "simulation.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let meta = RunMetadata::new("simulate", serde_json::to_value(&cfg)?, Some(cfg.seed), Some(cfg.grid.clone()));
    write_json(&a.out, "simulation.json", &json!({ "metadata": meta, "report": report }))?;
    print_sim_table(&report);
    Ok(())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let opts = LoadOptions { header: a.header, features: (a.features > 0).then_some(a.features) };
    let data = load_dataset(&a.data, opts)?;
    let cfg = ClassifyConfig {
        train: a.train,
        validation: a.validation,
        test: a.test,
        reps: a.reps,
        methods: a.methods.clone(),
        seed: a.seed,
        grid: a.grid.values()?,
        tuning_criterion: match a.criterion {
            Criterion::ValidationError => TuningCriterion::ValidationError,
            Criterion::ValidationGaussLoss => TuningCriterion::ValidationGaussLoss,
        },
        pooling: match a.pooling {
            Pooling::Total => PoolingDivisor::Total,
            Pooling::Unbiased => PoolingDivisor::Unbiased,
        },
    };
    let report = run_classification(&data, &cfg)?;
    let mut w = create(&a.out, "classification.csv")?;
    report.write_summary_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out, "classification_frequency.csv")?;
    report.write_frequency_csv(&mut w)?;
    w.flush()?;
    let meta = RunMetadata::new("classify", serde_json::to_value(&cfg)?, Some(cfg.seed), Some(cfg.grid.clone()));
    write_json(&a.out, "classification.json", &json!({ "metadata": meta, "report": report }))?;
    println!("{:>8} {:>12} {:>8}", "method", "test error", "sd");
    for m in &report.methods {
        match m.error {
            Some(s) => println!("{:>8} {:>12.4} {:>8.4}", m.method.id(), s.mean, s.sd),
            None => println!("{:>8} {:>12} {:>8}", m.method.id(), "NA", "NA"),
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let cfg = SuiteConfig { seed: a.seed, pairs: a.pairs, q: a.q, ..SuiteConfig::default() };
    let report = run_suite(&cfg)?;
    let meta = RunMetadata::new("verify", serde_json::to_value(&cfg)?, Some(cfg.seed), None);
    write_json(&a.out, "verify.json", &json!({ "metadata": meta, "report": report }))?;
    for p in &report.probes {
        let status = if p.as_expected() { "ok" } else { "UNEXPECTED" };
        println!("{:<48} passed={:<5} worst={:+.3e} {status}", p.name, p.passed, p.worst_violation);
    }
    for c in &report.crosscheck {
        println!(
            "{:<48} vector={:<5} geodesic={:<5} agree={}",
            format!("crosscheck:{:?}", c.family), c.vector_convex, c.geodesic_convex, c.agree
        );
    }
    if !report.all_as_expected() {
        return Err(Error::Numerical("verification suite produced unexpected results".into()));
    }
    Ok(())
}
