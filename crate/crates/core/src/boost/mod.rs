//! Two-stage non-cyclic component-wise gradient boosting for the censored
//! bivariate copula likelihood.
//!
//! Stage structure follows the estimation mode:
//!
//! - BTE: each margin is boosted separately on its univariate censored loss
//!   and early-stopped by out-of-bag risk; the fitted survival and density
//!   values are then frozen and the dependence predictor alone is boosted on
//!   the bivariate loss.
//! - SCR: only the terminal margin (margin 2) is boosted univariately; the
//!   non-terminal margin's two predictors and the dependence predictor are
//!   then boosted jointly and non-cyclically on the bivariate loss.
//!
//! Within an iteration every in-scope parameter proposes its best-fitting
//! base-learner by residual sum of squares; the parameter whose trial update
//! yields the lowest post-update training risk wins and only that predictor
//! moves. Early stopping picks the iteration minimizing out-of-bag risk,
//! which is what induces sparsity in the selected covariates.

mod engine;
mod predict;

pub use predict::{predict, predict_surface, Prediction};

use crate::dataset::BivariateSurvDataset;
use crate::error::{Error, Result};
use crate::learners::{Coefficients, PSplineSettings};
use crate::likelihood::{self, ParameterSurface};
use crate::margins::MarginFamily;
use crate::num::optim::{golden_section, nelder_mead_2d};
use crate::ETA_CLAMP;
use serde::{Deserialize, Serialize};

pub use crate::likelihood::{Dependence, ParamId, N_PARAMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilization {
    None,
    L2,
    Mad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    Bte,
    Scr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerChoice {
    Linear,
    PSpline,
}

/// Candidate learners for one distribution parameter: the listed covariate
/// columns under the chosen learner kind. An intercept learner is always in
/// the pool as learner id 0; covariates follow in order as ids 1..
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub covariates: Vec<usize>,
    pub learner: LearnerChoice,
}

impl Formula {
    pub fn all_linear(p: usize) -> Self {
        Formula { covariates: (0..p).collect(), learner: LearnerChoice::Linear }
    }

    pub fn all_pspline(p: usize) -> Self {
        Formula { covariates: (0..p).collect(), learner: LearnerChoice::PSpline }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub margin1: MarginFamily,
    pub margin2: MarginFamily,
    pub dependence: Dependence,
    pub mode: EstimationMode,
    pub formulas: [Formula; N_PARAMS],
    pub pspline: PSplineSettings,
}

impl ModelSpec {
    pub fn validate(&self, data: &BivariateSurvDataset) -> Result<()> {
        for (k, f) in self.formulas.iter().enumerate() {
            if let Some(&bad) = f.covariates.iter().find(|&&c| c >= data.p()) {
                return Err(Error::Config(format!(
                    "formula for {} references covariate column {bad}, dataset has {}",
                    ParamId::from_index(k).label(),
                    data.p()
                )));
            }
        }
        if self.mode == EstimationMode::Scr && !data.scr {
            return Err(Error::Config(
                "SCR estimation requires a dataset ingested with the SCR flag".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub step_length: f64,
    pub mstop_margin1: usize,
    pub mstop_margin2: usize,
    pub mstop_dependence: usize,
    pub stabilization: Stabilization,
    /// 1 = training row, 0 = out-of-bag (mstop tuning) row.
    pub oob_weights: Vec<u8>,
    pub seed: u64,
}

impl BoostConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.step_length > 0.0 && self.step_length < 1.0) {
            return Err(Error::Config(format!(
                "step length must lie in (0, 1), got {}",
                self.step_length
            )));
        }
        if self.oob_weights.len() != n {
            return Err(Error::Config(format!(
                "oob weights have length {}, dataset has {n} rows",
                self.oob_weights.len()
            )));
        }
        if self.oob_weights.iter().any(|&w| w > 1) {
            return Err(Error::Config("oob weights must be 0 or 1".into()));
        }
        let ones = self.oob_weights.iter().filter(|&&w| w == 1).count();
        if ones == 0 || ones == n {
            return Err(Error::Config(
                "early stopping needs both training (1) and out-of-bag (0) rows".into(),
            ));
        }
        Ok(())
    }
}

/// One stage's complete path: which parameters were in scope, every
/// selection, the out-of-bag risk curve (index 0 = offsets only) and the
/// chosen stopping iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageFit {
    pub params: Vec<ParamId>,
    pub history: Vec<HistoryEntry>,
    pub oob_risk: Vec<f64>,
    pub mstop_opt: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub param: ParamId,
    pub learner_id: usize,
    pub coef: Coefficients,
    /// Training risk after this update was applied.
    pub train_risk: f64,
}

/// Accumulated fit of one distribution parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamFit {
    pub offset: f64,
    /// Accumulated (already step-scaled) coefficients keyed by learner id,
    /// sorted; learners never selected are absent.
    pub coef: Vec<(usize, Coefficients)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub config: BoostConfig,
    pub covariate_names: Vec<String>,
    /// Training centering constants, reused at prediction time.
    pub col_means: Vec<f64>,
    pub params: [ParamFit; N_PARAMS],
    pub stages: Vec<StageFit>,
    /// Knot vectors of the P-spline bases, keyed by covariate column.
    pub spline_knots: Vec<(usize, Vec<f64>)>,
}

impl FittedModel {
    /// Covariate columns with a nonzero accumulated coefficient for the
    /// given parameter (the intercept learner does not count).
    pub fn selected_covariates(&self, param: ParamId) -> Vec<usize> {
        let formula = &self.spec.formulas[param.index()];
        let mut out = Vec::new();
        for (id, coef) in &self.params[param.index()].coef {
            if *id == 0 {
                continue;
            }
            let nonzero = match coef {
                Coefficients::Constant(c) => *c != 0.0,
                Coefficients::Slope(b) => *b != 0.0,
                Coefficients::Spline(v) => v.iter().any(|&x| x != 0.0),
            };
            if nonzero {
                out.push(formula.covariates[id - 1]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Out-of-bag stopping rule: index of the smallest risk, earliest on ties.
pub fn select_mstop(oob_risk: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &r) in oob_risk.iter().enumerate().skip(1) {
        if r < oob_risk[best] {
            best = i;
        }
    }
    best
}

/// Gradient stabilization. L2 rescales to norm sqrt(n); MAD divides by the
/// median absolute deviation. A zero denominator leaves the vector alone.
pub fn stabilize(g: &mut [f64], mode: Stabilization) {
    let n = g.len();
    if n == 0 {
        return;
    }
    let denom = match mode {
        Stabilization::None => return,
        Stabilization::L2 => {
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm / (n as f64).sqrt()
        }
        Stabilization::Mad => {
            let med = median(g);
            let mut dev: Vec<f64> = g.iter().map(|v| (v - med).abs()).collect();
            median_in_place(&mut dev)
        }
    };
    if denom > 0.0 && denom.is_finite() {
        for v in g.iter_mut() {
            *v /= denom;
        }
    }
}

fn median(v: &[f64]) -> f64 {
    let mut copy = v.to_vec();
    median_in_place(&mut copy)
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Intercept-only maximum-likelihood predictor values: each margin by
/// Nelder-Mead on its univariate censored likelihood, the dependence
/// predictor by golden-section on the bivariate likelihood with the margins
/// held at their offsets.
pub fn offsets(
    data: &BivariateSurvDataset,
    spec: &ModelSpec,
    weights: &[u8],
) -> Result<[f64; N_PARAMS]> {
    let rows: Vec<usize> = (0..data.n()).filter(|&i| weights[i] == 1).collect();
    if rows.is_empty() {
        return Err(Error::Dataset("no training rows selected".into()));
    }
    let (o1, o2) = margin_offset(data, spec.margin1, &rows, true)?;
    let (o3, o4) = margin_offset(data, spec.margin2, &rows, false)?;
    let mut out = [o1, o2, o3, o4, 0.0];
    if let Dependence::Copula(_) = spec.dependence {
        let surface = ParameterSurface::constant(data.n(), [o1, o2, o3, o4, 0.0]);
        out[4] = dependence_offset(data, spec, &surface, weights)?;
    }
    Ok(out)
}

/// Two-dimensional censored MLE of one margin's (scale, shape) predictors.
pub(crate) fn margin_offset(
    data: &BivariateSurvDataset,
    family: MarginFamily,
    rows: &[usize],
    first_margin: bool,
) -> Result<(f64, f64)> {
    let times: Vec<f64> = rows
        .iter()
        .map(|&i| if first_margin { data.times1[i] } else { data.times2[i] })
        .collect();
    let status: Vec<u8> = rows
        .iter()
        .map(|&i| if first_margin { data.status1[i] } else { data.status2[i] })
        .collect();
    let n = times.len() as f64;
    let mean_log = times.iter().map(|t| t.ln()).sum::<f64>() / n;
    let init = match family {
        MarginFamily::Weibull | MarginFamily::LogLogistic => {
            let mean = times.iter().sum::<f64>() / n;
            [mean.ln(), 0.0]
        }
        MarginFamily::LogNormal => {
            let var =
                times.iter().map(|t| (t.ln() - mean_log).powi(2)).sum::<f64>() / n.max(2.0);
            [mean_log, 0.5 * var.max(1e-4).ln()]
        }
    };
    let objective = |eta: [f64; 2]| -> f64 {
        if eta[0].abs() > 2.0 * ETA_CLAMP || eta[1].abs() > ETA_CLAMP {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for i in 0..times.len() {
            total -= likelihood::loglik_univariate(times[i], status[i], family, eta[0], eta[1]);
        }
        total / n
    };
    let (best, _) = nelder_mead_2d(objective, init, 0.5, 1e-8, 2000)?;
    Ok((best[0], best[1]))
}

/// One-dimensional dependence-offset search with margins frozen.
pub(crate) fn dependence_offset(
    data: &BivariateSurvDataset,
    spec: &ModelSpec,
    surface: &ParameterSurface,
    weights: &[u8],
) -> Result<f64> {
    let fam = match spec.dependence {
        Dependence::Independence => return Ok(0.0),
        Dependence::Copula(f) => f,
    };
    let bracket = match fam.kind {
        crate::copulas::CopulaKind::Frank => ETA_CLAMP,
        _ => 8.0,
    };
    let objective = |eta_c: f64| -> f64 {
        let mut trial = surface.clone();
        trial.eta[4].iter_mut().for_each(|e| *e = eta_c);
        likelihood::empirical_risk(
            data,
            spec.margin1,
            spec.margin2,
            &spec.dependence,
            &trial,
            weights,
        )
        .unwrap_or(f64::INFINITY)
    };
    let (eta_c, _) = golden_section(objective, -bracket, bracket, 1e-7)?;
    Ok(eta_c)
}

/// Fit the full two-stage model.
pub fn fit(
    data: &BivariateSurvDataset,
    spec: &ModelSpec,
    config: &BoostConfig,
) -> Result<FittedModel> {
    spec.validate(data)?;
    config.validate(data.n())?;
    engine::run(data, spec, config)
}

#[cfg(test)]
mod tests;
