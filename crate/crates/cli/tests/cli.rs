use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logshrink"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn read_csv_matrix(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

const COV: &str = "2,0.5,0\n0.5,1,0.2\n0,0.2,3\n";

#[test]
fn fit_at_zero_eta_returns_sample_covariance() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), COV).unwrap();
    for method in ["LogF", "sLogF", "dLogF", "mLogF", "S"] {
        let out = run(&["fit", "--cov", "s.csv", "--method", method, "--eta", "0", "--out", method], dir.path());
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let m = read_csv_matrix(&dir.path().join(method).join("sigma_hat.csv"));
        let s: Vec<Vec<f64>> = COV.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - s[i][j]).abs() < 1e-8, "{method} ({i},{j}): {} vs {}", m[i][j], s[i][j]);
            }
        }
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(method).join("fit.json")).unwrap()).unwrap();
        assert_eq!(json["metadata"]["command"], "fit");
        assert!(json["metadata"]["timestamp"].as_u64().unwrap() > 0);
    }
}

#[test]
fn fit_from_observations() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "a,b\n1,2\n3,1\n0,0\n2,5\n").unwrap();
    let out = run(&["fit", "--data", "x.csv", "--method", "sLogF", "--eta", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = read_csv_matrix(&dir.path().join("sigma_hat.csv"));
    assert_eq!(m.len(), 2);
    assert!((m[0][1] - m[1][0]).abs() < 1e-12);
}

#[test]
fn tune_writes_selected_eta() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), COV).unwrap();
    fs::write(dir.path().join("v.csv"), "1.5,0,0\n0,1.5,0\n0,0,1.5\n").unwrap();
    let out = run(
        &["tune", "--cov", "s.csv", "--valid-cov", "v.csv", "--method", "sLogF", "--grid", "0.01,100,9,log"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("tune.json")).unwrap()).unwrap();
    assert_eq!(json["tune"]["grid"].as_array().unwrap().len(), 10);
    assert!(json["tune"]["selected_eta"].as_f64().is_some());
}

#[test]
fn usage_error_exits_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fit", "--method", "nonsense", "--cov", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "usage");

    let out = run(&["fit", "--method", "sLogF"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_error_exits_1_with_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.csv"), "1,2\n2,1\n").unwrap();
    let out = run(&["fit", "--cov", "s.csv", "--method", "sLogF", "--eta", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "not_positive_definite");

    let out = run(&["fit", "--cov", "missing.csv", "--method", "S"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["--help"], dir.path()).status.success());
    assert!(run(&["simulate", "--help"], dir.path()).status.success());
    assert!(run(&["--version"], dir.path()).status.success());
}

#[test]
fn simulate_csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["simulate", "--model", "2,4", "--n", "20", "--q", "8", "--reps", "6", "--seed", "7"];
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let mut args = base.to_vec();
        args.extend(["--threads", threads, "--out", threads]);
        let out = run(&args, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(dir.path().join(threads).join("simulation.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(csv.starts_with("model,n,method,measure,mean,sd,count\n"));
}

#[test]
fn simulate_reads_config_file_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "models": [4], "q": 6, "n_values": [12], "reps": 2,
        "methods": [{"id": "S"}, {"id": "sLogF"}], "seed": 3, "grid": [0.0, 1.0, 10.0]
    });
    fs::write(dir.path().join("cfg.json"), cfg.to_string()).unwrap();
    let out = run(&["simulate", "--config", "cfg.json", "--reps", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulation.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["config"]["reps"], 3);
    assert_eq!(json["report"]["config"]["q"], 6);
    assert_eq!(json["metadata"]["seed"], 3);
}

#[test]
fn classify_runs_on_small_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..40 {
        let c = if i % 2 == 0 { "R" } else { "M" };
        let shift = if i % 2 == 0 { 0.0 } else { 1.5 };
        let a = ((i * 37) % 11) as f64 / 11.0 + shift;
        let b = ((i * 53) % 13) as f64 / 13.0;
        let d = ((i * 71) % 7) as f64 / 7.0 - shift;
        text.push_str(&format!("{a},{b},{d},{c}\n"));
    }
    fs::write(dir.path().join("d.csv"), text).unwrap();
    let out = run(
        &[
            "classify", "--data", "d.csv", "--features", "3", "--train", "20", "--validation", "10", "--test",
            "10", "--reps", "4", "--methods", "S,sLogF", "--grid", "0.01,10,5,log",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["classification.csv", "classification_frequency.csv", "classification.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--pairs", "10", "--q", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    let probes = json["report"]["probes"].as_array().unwrap();
    assert!(probes.iter().any(|p| p["expectation"] == "fail"));
    assert_eq!(json["report"]["crosscheck"].as_array().unwrap().len(), 6);
}
