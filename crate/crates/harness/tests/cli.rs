use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use longmem_harness::{run_experiment, summarize_dir, ExperimentConfig, HarnessError, Theorem};

fn longmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longmem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config(pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    for (k, v) in [("K", "4"), ("T", "500"), ("S", "4"), ("n", "2")] {
        config.set(k, v).unwrap();
    }
    for (k, v) in pairs {
        config.set(k, v).unwrap();
    }
    config
}

#[test]
fn run_writes_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let output = longmem(&[
        "run", "--algo", "alg2", "--env", "stochastic", "--K", "4", "--T", "400", "--S", "4", "--n", "2",
        "--gap", "0.3", "--seeds", "0..2", "--out", out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["config.txt", "diagnostics.csv", "ledger_seed0.csv", "ledger_seed1.csv", "summary.csv"]
    );
    let ledger = fs::read_to_string(out.join("ledger_seed0.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 401);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("algorithm,environment,"));
    assert!(stdout.contains("alg2,stochastic,4,400,4,2"));
}

#[test]
fn validation_errors_exit_with_two() {
    let output = longmem(&["run", "--T", "0"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("T"));

    let output = longmem(&["run", "--algo", "alg4"]);
    assert_eq!(output.status.code(), Some(2));

    let output = longmem(&["run", "--set", "nonsense"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp.txt");
    fs::write(&file, "# small run\nalgo=mpp\nK=3\nT=300\nS=3\nn=2\nseeds=4\n").unwrap();
    let output = longmem(&["run", "--config", file.to_str().unwrap(), "--T", "200"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("mpp,piecewise,3,200,3,2,3,1,5,"), "{stdout}");
}

#[test]
fn summarize_recomputes_the_written_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("alg1");
    let output = longmem(&[
        "run", "--K", "4", "--T", "600", "--S", "4", "--n", "2", "--seeds", "0..3", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let written = fs::read_to_string(out.join("summary.csv")).unwrap();
    let recomputed = longmem(&["summarize", "--in", out.to_str().unwrap(), "--theorem", "1"]);
    assert!(recomputed.status.success(), "{}", String::from_utf8_lossy(&recomputed.stderr));
    assert_eq!(String::from_utf8(recomputed.stdout).unwrap(), written);

    let missing = longmem(&["summarize", "--in", dir.path().join("absent").to_str().unwrap(), "--theorem", "1"]);
    assert!(!missing.status.success());
    let bad_theorem = longmem(&["summarize", "--in", out.to_str().unwrap(), "--theorem", "3"]);
    assert_eq!(bad_theorem.status.code(), Some(2));
}

#[test]
fn summarize_dir_reads_mpp_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(&[("algo", "mpp"), ("seeds", "0,5")]);
    let result = run_experiment(&config).unwrap();
    longmem_harness::write_outputs(&result, dir.path()).unwrap();
    let summary = summarize_dir(dir.path(), Theorem::Five).unwrap();
    assert_eq!(summary, result.summary);
    assert!(summary.max_mpp_restarts.is_some());
}

#[test]
fn two_seed_mean_is_the_average_of_final_regrets() {
    let result = run_experiment(&small_config(&[("seeds", "3,8")])).unwrap();
    let finals: Vec<f64> = result.runs.iter().map(|r| r.ledger.final_pseudo_regret()).collect();
    assert_eq!(finals.len(), 2);
    assert!((result.summary.mean_regret - (finals[0] + finals[1]) / 2.0).abs() < 1e-12);
}

#[test]
fn zero_round_runs_are_rejected() {
    let err = run_experiment(&small_config(&[("T", "0")])).unwrap_err();
    assert!(matches!(err, HarnessError::Validation(_)));
    assert_eq!(err.exit_code(), 2);
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|path| path.extension().is_some_and(|e| e == "csv"))
        .map(|path| {
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn sweep_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let output = longmem(&[
            "sweep", "--algo", "alg3", "--env", "sparse", "--K", "5", "--T", "300", "--S", "2", "--n", "2",
            "--seeds", "0..2", "--out", out.to_str().unwrap(), "--param", "rho", "--values", "2,3",
        ]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    assert_eq!(csv_bytes(&a.join("rho=2")), csv_bytes(&b.join("rho=2")));
    let sweep = fs::read_to_string(a.join("sweep_summary.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.starts_with("rho,algorithm,"));
}
