//! Integration tests of the command layer: file round-trips, validation
//! errors and reproducibility of command outputs.

use std::path::PathBuf;
use std::process::Command;
use survcop_cli::commands::{self, SimulateArgs};
use survcop_cli::config::RunConfigFile;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("survcop_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &PathBuf, budgets: (usize, usize, usize), split: [f64; 3]) -> PathBuf {
    let path = dir.join("config.json");
    let json = format!(
        r#"{{
  "margins": ["weibull", "loglogistic"],
  "copula": "gumbel",
  "mode": "bte",
  "step_length": 0.1,
  "mstop": {{"margin1": {}, "margin2": {}, "dependence": {}}},
  "stabilization": "l2",
  "split": [{}, {}, {}],
  "seed": 5
}}"#,
        budgets.0, budgets.1, budgets.2, split[0], split[1], split[2]
    );
    std::fs::write(&path, json).unwrap();
    path
}

fn simulate(dir: &PathBuf, n: usize, seed: u64) -> PathBuf {
    let data = dir.join("data.csv");
    commands::cmd_simulate(&SimulateArgs {
        scenario: "scr".into(),
        n,
        p: 5,
        rho: 0.5,
        seed,
        censoring: None,
        custom: None,
        out: data.clone(),
    })
    .unwrap();
    data
}

#[test]
fn pipeline_runs_on_every_builtin_scenario() {
    let dir = workdir("pipeline");
    for (scenario, censoring) in [
        ("scr", None),
        ("bte-linear", Some("mild".to_string())),
        ("bte-linear", Some("heavy".to_string())),
        ("bte-nonlinear", Some("mild".to_string())),
    ] {
        let data = dir.join(format!("{scenario}-{censoring:?}.csv"));
        commands::cmd_simulate(&SimulateArgs {
            scenario: scenario.into(),
            n: 240,
            p: 4,
            rho: 0.5,
            seed: 9,
            censoring: censoring.clone(),
            custom: None,
            out: data.clone(),
        })
        .unwrap();
        let config = write_config(&dir, (15, 15, 10), [0.5, 0.5, 0.0]);
        let model = dir.join("model.json");
        commands::cmd_fit(&data, &config, &model).unwrap();
        let pred = dir.join("pred.csv");
        commands::cmd_predict(&model, &data, &[0.5, 1.5], &pred).unwrap();
        let report = dir.join("report.json");
        commands::cmd_evaluate(&model, &data, None, Some(&report)).unwrap();
        assert!(report.exists() && pred.exists());
    }
}

#[test]
fn refitting_with_same_seed_is_byte_identical() {
    let dir = workdir("determinism");
    let data = simulate(&dir, 300, 21);
    let config = write_config(&dir, (40, 40, 20), [0.5, 0.5, 0.0]);
    let m1 = dir.join("m1.json");
    let m2 = dir.join("m2.json");
    commands::cmd_fit(&data, &config, &m1).unwrap();
    commands::cmd_fit(&data, &config, &m2).unwrap();
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let dir = workdir("badconfig");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"margins": ["weibull", "weibull"], "copula": "gumbel", "typo_key": 1}"#,
    )
    .unwrap();
    assert!(RunConfigFile::read(&path).is_err());
    std::fs::write(
        &path,
        r#"{"margins": ["weibull", "weibull"], "copula": "gumbel", "split": [0.9, 0.3, 0.0]}"#,
    )
    .unwrap();
    assert!(RunConfigFile::read(&path).is_err());
    std::fs::write(
        &path,
        r#"{"margins": ["weibull", "weibull"], "copula": "gaussian270"}"#,
    )
    .unwrap();
    assert!(RunConfigFile::read(&path).is_err());
}

#[test]
fn dataset_errors_carry_line_numbers() {
    let dir = workdir("baddata");
    let path = dir.join("bad.csv");
    std::fs::write(&path, "time1,status1,time2,status2,x1\n1.0,1,2.0,1,0.5\n-3.0,1,2.0,0,0.1\n")
        .unwrap();
    let err = survcop::BivariateSurvDataset::read_csv(&path, false).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn custom_scenario_file_roundtrip() {
    let dir = workdir("custom");
    let custom = dir.join("custom.json");
    std::fs::write(
        &custom,
        r#"{
  "margins": ["weibull", "loglogistic"],
  "copula": "clayton",
  "predictors": {
    "margin1": {"mu": {"intercept": 0.4, "coefficients": {"x1": -1.0}}, "sigma": {"intercept": 0.2}},
    "margin2": {"mu": {"intercept": 0.3, "coefficients": {"x2": 0.7}}, "sigma": {}},
    "dependence": {"intercept": 0.5}
  },
  "censor_upper": [6.0, 6.0],
  "scr": false
}"#,
    )
    .unwrap();
    let data = dir.join("custom_data.csv");
    let truth = commands::cmd_simulate(&SimulateArgs {
        scenario: "custom".into(),
        n: 200,
        p: 3,
        rho: 0.0,
        seed: 2,
        censoring: None,
        custom: Some(custom),
        out: data.clone(),
    })
    .unwrap();
    assert_eq!(truth.informative[0], vec![0]);
    assert_eq!(truth.informative[2], vec![1]);
    assert!(data.exists());
    assert!(commands::truth_path(&data).exists());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_survcop");
    // Validation failure: missing file.
    let out = Command::new(bin)
        .args(["fit", "--data", "/nonexistent.csv", "--config", "/nonexistent.json", "--out", "/tmp/x.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Unknown scenario.
    let out = Command::new(bin)
        .args(["simulate", "--scenario", "nope", "--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Success path.
    let dir = workdir("bin");
    let out = Command::new(bin)
        .args([
            "simulate",
            "--scenario",
            "scr",
            "--n",
            "60",
            "--p",
            "4",
            "--seed",
            "1",
            "--out",
            dir.join("d.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn scan_single_candidate_gives_single_row() {
    let dir = workdir("scan1");
    let data = simulate(&dir, 300, 4);
    let config = write_config(&dir, (20, 20, 10), [0.5, 0.25, 0.25]);
    let report = commands::cmd_scan(
        &data,
        &config,
        &["weibull".to_string()],
        &["gumbel".to_string()],
        None,
    )
    .unwrap();
    assert_eq!(report.margin_scores.len(), 1);
    assert_eq!(report.copula_scores.len(), 1);
    assert_eq!(report.selected_margins, ["weibull".to_string(), "weibull".to_string()]);
}
