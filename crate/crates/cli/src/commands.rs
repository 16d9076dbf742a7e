//! Command implementations shared by the binary and the integration tests.

use crate::config::RunConfigFile;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use survcop::boost::{self, Dependence, EstimationMode, FittedModel, ParamId};
use survcop::dataset::{split_indices, BivariateSurvDataset};
use survcop::error::{Error, Result};
use survcop::likelihood::N_PARAMS;
use survcop::margins::MarginFamily;
use survcop::metrics::{self, EvaluationReport};
use survcop::simulate::{
    generate, CensoringRegime, CustomScenario, DgpScenario, LinearPredictor, ScenarioKind,
    TruthRecord,
};

/// Sidecar path of a dataset: `<data>.truth.json`.
pub fn truth_path(data: &Path) -> PathBuf {
    let mut os = data.as_os_str().to_owned();
    os.push(".truth.json");
    PathBuf::from(os)
}

// ---------------------------------------------------------------- simulate

/// Custom-scenario description file (JSON, unknown keys rejected).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenarioFile {
    pub margins: [String; 2],
    pub copula: String,
    pub predictors: CustomPredictors,
    pub censor_upper: [f64; 2],
    #[serde(default)]
    pub scr: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPredictors {
    pub margin1: CustomMarginPredictors,
    pub margin2: CustomMarginPredictors,
    pub dependence: CustomPredictor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMarginPredictors {
    pub mu: CustomPredictor,
    pub sigma: CustomPredictor,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPredictor {
    #[serde(default)]
    pub intercept: f64,
    /// Coefficients keyed by covariate name ("x1", "x2", ...).
    #[serde(default)]
    pub coefficients: BTreeMap<String, f64>,
}

fn covariate_name_to_index(name: &str, p: usize) -> Result<usize> {
    let idx: usize = name
        .strip_prefix('x')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(format!("covariate '{name}' is not of the form xK")))?;
    if idx == 0 || idx > p {
        return Err(Error::Config(format!(
            "covariate '{name}' outside 1..={p}"
        )));
    }
    Ok(idx - 1)
}

impl CustomPredictor {
    fn to_linear(&self, p: usize) -> Result<LinearPredictor> {
        let mut coefs = Vec::new();
        for (name, &w) in &self.coefficients {
            coefs.push((covariate_name_to_index(name, p)?, w));
        }
        Ok(LinearPredictor { intercept: self.intercept, coefs })
    }
}

pub struct SimulateArgs {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
    pub censoring: Option<String>,
    pub custom: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<TruthRecord> {
    let regime = match args.censoring.as_deref() {
        None => CensoringRegime::Mild,
        Some(s) if s.eq_ignore_ascii_case("mild") => CensoringRegime::Mild,
        Some(s) if s.eq_ignore_ascii_case("heavy") => CensoringRegime::Heavy,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown censoring regime '{other}' (mild|heavy)"
            )))
        }
    };
    let kind = match args.scenario.to_ascii_lowercase().as_str() {
        "scr" => ScenarioKind::Scr,
        "bte-linear" => ScenarioKind::BteLinear(regime),
        "bte-nonlinear" => ScenarioKind::BteNonlinear(regime),
        "custom" => {
            let path = args.custom.as_ref().ok_or_else(|| {
                Error::Config("custom scenario needs --custom <file.json>".into())
            })?;
            let file: CustomScenarioFile = serde_json::from_str(&std::fs::read_to_string(path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            ScenarioKind::Custom(CustomScenario {
                margin1: MarginFamily::parse(&file.margins[0])?,
                margin2: MarginFamily::parse(&file.margins[1])?,
                dependence: Dependence::parse(&file.copula)?,
                predictors: [
                    file.predictors.margin1.mu.to_linear(args.p)?,
                    file.predictors.margin1.sigma.to_linear(args.p)?,
                    file.predictors.margin2.mu.to_linear(args.p)?,
                    file.predictors.margin2.sigma.to_linear(args.p)?,
                    file.predictors.dependence.to_linear(args.p)?,
                ],
                censor_upper: file.censor_upper,
                scr: file.scr,
            })
        }
        other => {
            return Err(Error::Config(format!(
                "unknown scenario '{other}' (scr|bte-linear|bte-nonlinear|custom)"
            )))
        }
    };
    let scenario =
        DgpScenario { kind, n: args.n, p: args.p, rho: args.rho, seed: args.seed };
    let out = generate(&scenario)?;
    out.dataset.write_csv(&args.out)?;
    out.truth.write_json(&truth_path(&args.out))?;
    println!(
        "wrote {} ({} rows, {} covariates); censoring rates: margin1 {:.1}%, margin2 {:.1}%",
        args.out.display(),
        out.dataset.n(),
        out.dataset.p(),
        100.0 * out.truth.censoring_rate1,
        100.0 * out.truth.censoring_rate2
    );
    Ok(out.truth)
}

// --------------------------------------------------------------------- fit

/// Split the data per the config, fit on the train+tuning block, write the
/// model artifact.
pub fn cmd_fit(data_path: &Path, config_path: &Path, out: &Path) -> Result<FittedModel> {
    let cfg = RunConfigFile::read(config_path)?;
    let mode = cfg.parse_mode()?;
    let data = BivariateSurvDataset::read_csv(data_path, mode == EstimationMode::Scr)?;
    let (model, _) = fit_with_split(&data, &cfg)?;
    std::fs::write(out, model.to_json()?)?;
    print_fit_report(&model);
    println!("model written to {}", out.display());
    Ok(model)
}

/// Fit on the train+tuning partition; returns the model and the test-row
/// indices (into the original data) for callers that evaluate held-out fit.
pub fn fit_with_split(
    data: &BivariateSurvDataset,
    cfg: &RunConfigFile,
) -> Result<(FittedModel, Vec<usize>)> {
    let (train, tune, test) = split_indices(data.n(), cfg.split_fractions(), cfg.seed)?;
    if train.is_empty() || tune.is_empty() {
        return Err(Error::Config(
            "split leaves an empty train or mstop partition".into(),
        ));
    }
    let mut keep: Vec<usize> = train.iter().chain(tune.iter()).copied().collect();
    keep.sort_unstable();
    let is_train: std::collections::HashSet<usize> = train.into_iter().collect();
    let fit_data = data.select(&keep, data.scr)?;
    let weights: Vec<u8> = keep.iter().map(|i| u8::from(is_train.contains(i))).collect();
    let spec = cfg.model_spec(&fit_data)?;
    let config = cfg.boost_config(weights)?;
    let model = boost::fit(&fit_data, &spec, &config)?;
    let mut test_sorted = test;
    test_sorted.sort_unstable();
    Ok((model, test_sorted))
}

fn print_fit_report(model: &FittedModel) {
    println!(
        "margins: {} + {}; dependence: {}; mode: {:?}",
        model.spec.margin1.name(),
        model.spec.margin2.name(),
        model.spec.dependence.name(),
        model.spec.mode
    );
    for stage in &model.stages {
        let labels: Vec<&str> = stage.params.iter().map(|p| p.label()).collect();
        println!(
            "stage [{}]: mstop_opt = {} of {}",
            labels.join(", "),
            stage.mstop_opt,
            stage.oob_risk.len() - 1
        );
    }
    println!("{:<16} {:>10} {:>20}", "parameter", "offset", "selected covariates");
    for param in ParamId::ALL {
        let k = param.index();
        println!(
            "{:<16} {:>10.4} {:>20}",
            param.label(),
            model.params[k].offset,
            model.selected_covariates(param).len()
        );
    }
}

// ----------------------------------------------------------------- predict

pub fn cmd_predict(
    model_path: &Path,
    data_path: &Path,
    times: &[f64],
    out: &Path,
) -> Result<()> {
    let model = FittedModel::from_json(&std::fs::read_to_string(model_path)?)?;
    let data = BivariateSurvDataset::read_csv(data_path, false)?;
    let pred = boost::predict(&model, &data, times)?;

    let mut file = std::fs::File::create(out)?;
    // Header comment documenting the column layout and the time mapping.
    writeln!(
        file,
        "# per-observation predictions; eta_* are link-scale predictors, theta_* natural-scale parameters"
    )?;
    writeln!(
        file,
        "# surv1_tK / surv2_tK are marginal survival at query time tK; joint_tA_tB is S(tA, tB)"
    )?;
    for (k, t) in times.iter().enumerate() {
        writeln!(file, "# t{k} = {t}")?;
    }
    let mut header: Vec<String> = Vec::new();
    let eta_names =
        ["eta_margin1_mu", "eta_margin1_sigma", "eta_margin2_mu", "eta_margin2_sigma", "eta_dependence"];
    let theta_names = [
        "theta_margin1_mu",
        "theta_margin1_sigma",
        "theta_margin2_mu",
        "theta_margin2_sigma",
        "theta_dependence",
    ];
    header.extend(eta_names.iter().map(|s| s.to_string()));
    header.extend(theta_names.iter().map(|s| s.to_string()));
    header.extend(
        ["kendall_tau", "psi_lower", "psi_upper", "cross_ratio"].iter().map(|s| s.to_string()),
    );
    for k in 0..times.len() {
        header.push(format!("surv1_t{k}"));
    }
    for k in 0..times.len() {
        header.push(format!("surv2_t{k}"));
    }
    for a in 0..times.len() {
        for b in 0..times.len() {
            header.push(format!("joint_t{a}_t{b}"));
        }
    }
    writeln!(file, "{}", header.join(","))?;
    for i in 0..data.n() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for k in 0..N_PARAMS {
            row.push(pred.surface.eta[k][i].to_string());
        }
        for k in 0..N_PARAMS {
            row.push(pred.theta[k][i].to_string());
        }
        row.push(pred.kendall_tau[i].to_string());
        row.push(pred.psi_lower[i].to_string());
        row.push(pred.psi_upper[i].to_string());
        row.push(pred.cross_ratio[i].to_string());
        for k in 0..times.len() {
            row.push(pred.surv1[k][i].to_string());
        }
        for k in 0..times.len() {
            row.push(pred.surv2[k][i].to_string());
        }
        for a in 0..times.len() {
            for b in 0..times.len() {
                row.push(pred.joint[a][b][i].to_string());
            }
        }
        writeln!(file, "{}", row.join(","))?;
    }
    println!("predictions written to {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------- evaluate

pub fn cmd_evaluate(
    model_path: &Path,
    data_path: &Path,
    truth: Option<&Path>,
    out: Option<&Path>,
) -> Result<EvaluationReport> {
    let model = FittedModel::from_json(&std::fs::read_to_string(model_path)?)?;
    let data = BivariateSurvDataset::read_csv(data_path, false)?;
    let truth_record = match truth {
        Some(p) => Some(TruthRecord::read_json(p)?),
        None => {
            let sidecar = truth_path(data_path);
            if sidecar.exists() {
                Some(TruthRecord::read_json(&sidecar)?)
            } else {
                None
            }
        }
    };
    if let Some(tr) = &truth_record {
        if tr.n != data.n() {
            return Err(Error::SchemaMismatch(format!(
                "truth record covers {} rows, dataset has {}",
                tr.n,
                data.n()
            )));
        }
    }
    let report = metrics::evaluate(&model, &data, truth_record.as_ref())?;
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = out {
        std::fs::write(path, &json)?;
        println!("report written to {}", path.display());
    }
    println!(
        "log-score {:.3} | margin1 ibs {:.4} c-index {:.4} | margin2 ibs {:.4} c-index {:.4}",
        report.log_score,
        report.margin1.ibs,
        report.margin1.c_index,
        report.margin2.ibs,
        report.margin2.c_index
    );
    if let Some(sel) = &report.selection {
        for s in sel {
            println!(
                "{:<16} tpr {} fpr {}",
                s.parameter,
                s.tpr.map_or("n/a".into(), |v| format!("{v:.3}")),
                s.fpr.map_or("n/a".into(), |v| format!("{v:.3}"))
            );
        }
    }
    Ok(report)
}

// -------------------------------------------------------------------- scan

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginScanRow {
    pub family: String,
    pub event1_log_score: f64,
    pub event2_log_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopulaScanRow {
    pub copula: String,
    pub log_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub n_train: usize,
    pub n_tune: usize,
    pub n_test: usize,
    pub margin_scores: Vec<MarginScanRow>,
    pub selected_margins: [String; 2],
    /// Ranked ascending by held-out log-score.
    pub copula_scores: Vec<CopulaScanRow>,
}

pub fn cmd_scan(
    data_path: &Path,
    config_path: &Path,
    margins: &[String],
    copulas: &[String],
    out: Option<&Path>,
) -> Result<ScanReport> {
    let cfg = RunConfigFile::read(config_path)?;
    let mode = cfg.parse_mode()?;
    let data = BivariateSurvDataset::read_csv(data_path, mode == EstimationMode::Scr)?;
    let report = scan(&data, &cfg, margins, copulas)?;
    print_scan_report(&report);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
        println!("scan report written to {}", path.display());
    }
    Ok(report)
}

/// Stage A ranks margin families per event by held-out univariate censored
/// log-score; stage B fixes the winners and ranks the requested dependence
/// structures by held-out bivariate log-score.
pub fn scan(
    data: &BivariateSurvDataset,
    cfg: &RunConfigFile,
    margins: &[String],
    copulas: &[String],
) -> Result<ScanReport> {
    if cfg.split_fractions()[2] <= 0.0 {
        return Err(Error::Config(
            "scan needs a positive held-out test fraction in the split".into(),
        ));
    }
    if margins.is_empty() || copulas.is_empty() {
        return Err(Error::Config("scan needs at least one margin and one copula".into()));
    }
    let mut margin_scores = Vec::new();
    for fam in margins {
        // Independence fit with the same family on both margins scores each
        // event's univariate model in one pass; the margin stages do not
        // interact.
        let mut sub = cfg.clone();
        sub.margins = [fam.clone(), fam.clone()];
        sub.copula = "independence".into();
        let (model, test_rows) = fit_with_split(data, &sub)?;
        let test_data = data.select(&test_rows, false)?;
        let surface = survcop::predict_surface(&model, &test_data)?;
        let family = MarginFamily::parse(fam)?;
        let s1 = metrics::univariate_log_score(
            family,
            &test_data.times1,
            &test_data.status1,
            &surface.eta[0],
            &surface.eta[1],
        );
        let s2 = metrics::univariate_log_score(
            family,
            &test_data.times2,
            &test_data.status2,
            &surface.eta[2],
            &surface.eta[3],
        );
        margin_scores.push(MarginScanRow {
            family: fam.clone(),
            event1_log_score: s1,
            event2_log_score: s2,
        });
    }
    let best = |pick: &dyn Fn(&MarginScanRow) -> f64| -> String {
        let mut best_i = 0;
        for i in 1..margin_scores.len() {
            if pick(&margin_scores[i]) < pick(&margin_scores[best_i]) {
                best_i = i;
            }
        }
        margin_scores[best_i].family.clone()
    };
    let winner1 = best(&|r| r.event1_log_score);
    let winner2 = best(&|r| r.event2_log_score);

    let mut copula_scores = Vec::new();
    for cop in copulas {
        let mut sub = cfg.clone();
        sub.margins = [winner1.clone(), winner2.clone()];
        sub.copula = cop.clone();
        let (model, test) = fit_with_split(data, &sub)?;
        let test_data = data.select(&test, false)?;
        let score = metrics::log_score(&model, &test_data)?;
        copula_scores.push(CopulaScanRow { copula: cop.clone(), log_score: score });
    }
    copula_scores.sort_by(|a, b| a.log_score.partial_cmp(&b.log_score).unwrap());

    let (train, tune, test) = split_indices(data.n(), cfg.split_fractions(), cfg.seed)?;
    Ok(ScanReport {
        n_train: train.len(),
        n_tune: tune.len(),
        n_test: test.len(),
        margin_scores,
        selected_margins: [winner1, winner2],
        copula_scores,
    })
}

fn print_scan_report(report: &ScanReport) {
    println!(
        "held-out log-scores on {} test observations (train {}, tuning {})",
        report.n_test, report.n_train, report.n_tune
    );
    println!("margin scan:");
    println!("  {:<14} {:>12} {:>12}", "family", "event 1", "event 2");
    for row in &report.margin_scores {
        let m1 = if row.family == report.selected_margins[0] { "*" } else { " " };
        let m2 = if row.family == report.selected_margins[1] { "*" } else { " " };
        println!(
            "  {:<14} {:>11.2}{m1} {:>11.2}{m2}",
            row.family, row.event1_log_score, row.event2_log_score
        );
    }
    println!(
        "copula scan with margins ({}, {}):",
        report.selected_margins[0], report.selected_margins[1]
    );
    for (rank, row) in report.copula_scores.iter().enumerate() {
        println!("  {:>2}. {:<16} {:>11.2}", rank + 1, row.copula, row.log_score);
    }
}
