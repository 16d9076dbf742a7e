//! Run-configuration file: JSON, schema-validated (unknown keys rejected)
//! before any computation.

use serde::{Deserialize, Serialize};
use survcop::boost::{
    BoostConfig, Dependence, EstimationMode, Formula, LearnerChoice, ModelSpec, Stabilization,
};
use survcop::dataset::BivariateSurvDataset;
use survcop::error::{Error, Result};
use survcop::margins::MarginFamily;

fn default_step() -> f64 {
    0.1
}

fn default_budget() -> usize {
    1000
}

fn default_split() -> Vec<f64> {
    vec![0.5, 0.5, 0.0]
}

fn default_stabilization() -> String {
    "l2".into()
}

fn default_mode() -> String {
    "bte".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MstopBudgets {
    #[serde(default = "default_budget")]
    pub margin1: usize,
    #[serde(default = "default_budget")]
    pub margin2: usize,
    #[serde(default = "default_budget")]
    pub dependence: usize,
}

impl Default for MstopBudgets {
    fn default() -> Self {
        MstopBudgets {
            margin1: default_budget(),
            margin2: default_budget(),
            dependence: default_budget(),
        }
    }
}

/// Covariate list of one formula: the string "all" or explicit column names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovariateList {
    All(String),
    Names(Vec<String>),
}

impl Default for CovariateList {
    fn default() -> Self {
        CovariateList::All("all".into())
    }
}

fn default_learner() -> String {
    "linear".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaConfig {
    #[serde(default)]
    pub covariates: CovariateList,
    #[serde(default = "default_learner")]
    pub learner: String,
}

impl Default for FormulaConfig {
    fn default() -> Self {
        FormulaConfig { covariates: CovariateList::default(), learner: default_learner() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginFormulas {
    #[serde(default)]
    pub mu: FormulaConfig,
    #[serde(default)]
    pub sigma: FormulaConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulasConfig {
    #[serde(default)]
    pub margin1: MarginFormulas,
    #[serde(default)]
    pub margin2: MarginFormulas,
    #[serde(default)]
    pub dependence: FormulaConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub margins: [String; 2],
    pub copula: String,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_step")]
    pub step_length: f64,
    #[serde(default)]
    pub mstop: MstopBudgets,
    #[serde(default = "default_stabilization")]
    pub stabilization: String,
    /// Train / mstop-tuning / test fractions.
    #[serde(default = "default_split")]
    pub split: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub formulas: FormulasConfig,
}

impl RunConfigFile {
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfigFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.len() != 3 {
            return Err(Error::Config("split needs exactly three fractions".into()));
        }
        let total: f64 = self.split.iter().sum();
        if self.split.iter().any(|&f| f < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be nonnegative and sum to 1, got {:?}",
                self.split
            )));
        }
        MarginFamily::parse(&self.margins[0])?;
        MarginFamily::parse(&self.margins[1])?;
        Dependence::parse(&self.copula)?;
        self.parse_mode()?;
        parse_stabilization(&self.stabilization)?;
        Ok(())
    }

    pub fn parse_mode(&self) -> Result<EstimationMode> {
        match self.mode.to_ascii_lowercase().as_str() {
            "bte" => Ok(EstimationMode::Bte),
            "scr" => Ok(EstimationMode::Scr),
            other => Err(Error::Config(format!("unknown mode '{other}' (bte|scr)"))),
        }
    }

    pub fn split_fractions(&self) -> [f64; 3] {
        [self.split[0], self.split[1], self.split[2]]
    }

    /// Instantiate the model specification against a dataset's columns.
    pub fn model_spec(&self, data: &BivariateSurvDataset) -> Result<ModelSpec> {
        let formula = |fc: &FormulaConfig| -> Result<Formula> {
            let learner = match fc.learner.to_ascii_lowercase().as_str() {
                "linear" => LearnerChoice::Linear,
                "pspline" => LearnerChoice::PSpline,
                other => {
                    return Err(Error::Config(format!(
                        "unknown learner '{other}' (linear|pspline)"
                    )))
                }
            };
            let covariates = match &fc.covariates {
                CovariateList::All(s) if s.eq_ignore_ascii_case("all") => {
                    (0..data.p()).collect()
                }
                CovariateList::All(s) => {
                    return Err(Error::Config(format!(
                        "covariates must be \"all\" or a list of names, got '{s}'"
                    )))
                }
                CovariateList::Names(names) => names
                    .iter()
                    .map(|n| {
                        data.covariate_index(n).ok_or_else(|| {
                            Error::Config(format!("unknown covariate '{n}' in formula"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            Ok(Formula { covariates, learner })
        };
        Ok(ModelSpec {
            margin1: MarginFamily::parse(&self.margins[0])?,
            margin2: MarginFamily::parse(&self.margins[1])?,
            dependence: Dependence::parse(&self.copula)?,
            mode: self.parse_mode()?,
            formulas: [
                formula(&self.formulas.margin1.mu)?,
                formula(&self.formulas.margin1.sigma)?,
                formula(&self.formulas.margin2.mu)?,
                formula(&self.formulas.margin2.sigma)?,
                formula(&self.formulas.dependence)?,
            ],
            pspline: Default::default(),
        })
    }

    /// Boosting configuration given the out-of-bag weights.
    pub fn boost_config(&self, oob_weights: Vec<u8>) -> Result<BoostConfig> {
        Ok(BoostConfig {
            step_length: self.step_length,
            mstop_margin1: self.mstop.margin1,
            mstop_margin2: self.mstop.margin2,
            mstop_dependence: self.mstop.dependence,
            stabilization: parse_stabilization(&self.stabilization)?,
            oob_weights,
            seed: self.seed,
        })
    }
}

pub fn parse_stabilization(s: &str) -> Result<Stabilization> {
    match s.to_ascii_lowercase().as_str() {
        "none" => Ok(Stabilization::None),
        "l2" => Ok(Stabilization::L2),
        "mad" => Ok(Stabilization::Mad),
        other => Err(Error::Config(format!(
            "unknown stabilization '{other}' (none|l2|mad)"
        ))),
    }
}
