//! Built-in data-generating processes: Toeplitz-correlated covariates,
//! copula-coupled event times with covariate-driven parameters, independent
//! uniform censoring, and the semi-competing-risks observation rules.
//!
//! Covariates are drawn from a latent Gaussian AR(1) recursion (equivalent
//! to the Toeplitz covariance rho^|i-j|) and mapped to (0,1) through the
//! standard normal CDF. Event times come from interpreting the copula
//! coordinates as survival levels: T = S^-1(u). Every observation uses its
//! own counter-based RNG substream, so generation parallelizes over rows and
//! stays bitwise reproducible.

use crate::copulas::{CopulaFamily, CopulaKind, Given, Rotation};
use crate::dataset::BivariateSurvDataset;
use crate::error::{Error, Result};
use crate::likelihood::Dependence;
use crate::margins::{MarginFamily, MarginParams};
use crate::num::{norm_cdf, norm_quantile};
use crate::par;
use crate::U_EPS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensoringRegime {
    Mild,
    Heavy,
}

/// Linear predictor of a custom scenario: intercept plus sparse
/// coefficients on covariate columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub intercept: f64,
    pub coefs: Vec<(usize, f64)>,
}

impl LinearPredictor {
    pub fn constant(c: f64) -> Self {
        LinearPredictor { intercept: c, coefs: vec![] }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.intercept;
        for &(j, b) in &self.coefs {
            v += b * x[j];
        }
        v
    }

    fn informative(&self) -> Vec<usize> {
        self.coefs.iter().filter(|(_, b)| *b != 0.0).map(|(j, _)| *j).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomScenario {
    pub margin1: MarginFamily,
    pub margin2: MarginFamily,
    pub dependence: Dependence,
    pub predictors: [LinearPredictor; 5],
    /// Uniform censoring upper bounds per margin (the first entry is the
    /// shared bound under SCR).
    pub censor_upper: [f64; 2],
    pub scr: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScenarioKind {
    Scr,
    BteLinear(CensoringRegime),
    BteNonlinear(CensoringRegime),
    Custom(CustomScenario),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DgpScenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
}

/// Everything the generator knew: true predictors, informative sets and the
/// model structure, written as the `.truth.json` sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRecord {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub seed: u64,
    pub margin1: MarginFamily,
    pub margin2: MarginFamily,
    pub dependence: Dependence,
    pub informative: [Vec<usize>; 5],
    /// Calibrated scale intercepts (BTE linear scenarios), stored so the
    /// record evaluates the equations exactly as generated.
    pub intercepts: [f64; 5],
    pub eta: [Vec<f64>; 5],
    pub censoring_rate1: f64,
    pub censoring_rate2: f64,
}

impl TruthRecord {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub struct SimOutput {
    pub dataset: BivariateSurvDataset,
    pub truth: TruthRecord,
}

const SCR_CENSOR_UPPER: f64 = 7.0;
const BTE_LINEAR_CENSOR_UPPER: f64 = 8.5;
const BTE_NONLINEAR_CENSOR_UPPER: [f64; 2] = [11.0, 2.75];
const CALIBRATION_N: usize = 20_000;
const CALIBRATION_SEED: u64 = 0x5eed_ca1b;

impl DgpScenario {
    pub fn margin1(&self) -> MarginFamily {
        match &self.kind {
            ScenarioKind::Custom(c) => c.margin1,
            _ => MarginFamily::Weibull,
        }
    }

    pub fn margin2(&self) -> MarginFamily {
        match &self.kind {
            ScenarioKind::Custom(c) => c.margin2,
            _ => MarginFamily::LogLogistic,
        }
    }

    pub fn dependence(&self) -> Dependence {
        match &self.kind {
            ScenarioKind::Scr => Dependence::Copula(CopulaFamily {
                kind: CopulaKind::Gumbel,
                rotation: Rotation::None,
            }),
            ScenarioKind::BteLinear(_) | ScenarioKind::BteNonlinear(_) => {
                Dependence::Copula(CopulaFamily {
                    kind: CopulaKind::Clayton,
                    rotation: Rotation::None,
                })
            }
            ScenarioKind::Custom(c) => c.dependence,
        }
    }

    pub fn is_scr(&self) -> bool {
        match &self.kind {
            ScenarioKind::Scr => true,
            ScenarioKind::Custom(c) => c.scr,
            _ => false,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ScenarioKind::Scr => "scr".into(),
            ScenarioKind::BteLinear(CensoringRegime::Mild) => "bte-linear-mild".into(),
            ScenarioKind::BteLinear(CensoringRegime::Heavy) => "bte-linear-heavy".into(),
            ScenarioKind::BteNonlinear(CensoringRegime::Mild) => "bte-nonlinear-mild".into(),
            ScenarioKind::BteNonlinear(CensoringRegime::Heavy) => "bte-nonlinear-heavy".into(),
            ScenarioKind::Custom(_) => "custom".into(),
        }
    }

    fn censor_upper(&self) -> [f64; 2] {
        match &self.kind {
            ScenarioKind::Scr => [SCR_CENSOR_UPPER, SCR_CENSOR_UPPER],
            ScenarioKind::BteLinear(_) => [BTE_LINEAR_CENSOR_UPPER, BTE_LINEAR_CENSOR_UPPER],
            ScenarioKind::BteNonlinear(CensoringRegime::Mild) => {
                [BTE_NONLINEAR_CENSOR_UPPER[0], BTE_NONLINEAR_CENSOR_UPPER[0]]
            }
            ScenarioKind::BteNonlinear(CensoringRegime::Heavy) => {
                [BTE_NONLINEAR_CENSOR_UPPER[1], BTE_NONLINEAR_CENSOR_UPPER[1]]
            }
            ScenarioKind::Custom(c) => c.censor_upper,
        }
    }

    fn min_p(&self) -> usize {
        match &self.kind {
            ScenarioKind::Custom(c) => c
                .predictors
                .iter()
                .flat_map(|p| p.coefs.iter().map(|(j, _)| j + 1))
                .max()
                .unwrap_or(0),
            _ => 4,
        }
    }

    /// The scenario's five predictor equations evaluated on one covariate
    /// row (unit-interval scale), with the given intercept vector.
    pub fn eval_etas(&self, x: &[f64], intercepts: &[f64; 5]) -> [f64; 5] {
        match &self.kind {
            ScenarioKind::Scr | ScenarioKind::BteLinear(_) => [
                intercepts[0] - 2.0 * x[0],
                intercepts[1] + x[1] + 1.5 * x[3],
                intercepts[2] + x[0] + 1.5 * x[1],
                intercepts[3] + 0.75 * x[1] + 0.75 * x[3],
                intercepts[4] - 2.0 * x[1] - 2.0 * x[3],
            ],
            ScenarioKind::BteNonlinear(_) => [
                -1.8 * (4.0 * x[2]).cos(),
                0.02 - x[0].sin() + (-2.0 * (x[0] + 1.0)).exp()
                    + 3.0 * (2.0 * std::f64::consts::PI * x[0]).cos(),
                2.0 * (4.0 * x[1]).sin(),
                0.979 * (2.0 * x[3]).cos() + 1.958 * x[3].tanh(),
                -3.1 * (4.0 * x[2]).cos(),
            ],
            ScenarioKind::Custom(c) => {
                std::array::from_fn(|k| intercepts[k] + c.predictors[k].eval(x))
            }
        }
    }

    /// Intercepts before calibration: the SCR scenario hard-codes its
    /// shape-2 intercept of 1 and the dependence intercept of 3; the BTE
    /// scenarios share the dependence intercept.
    fn base_intercepts(&self) -> [f64; 5] {
        match &self.kind {
            ScenarioKind::Scr => [0.0, 0.0, 0.0, 1.0, 3.0],
            ScenarioKind::BteLinear(_) => [0.0, 0.0, 0.0, 0.0, 3.0],
            ScenarioKind::BteNonlinear(_) => [0.0; 5],
            ScenarioKind::Custom(c) => std::array::from_fn(|k| c.predictors[k].intercept),
        }
    }

    pub fn informative_sets(&self) -> [Vec<usize>; 5] {
        match &self.kind {
            ScenarioKind::Scr | ScenarioKind::BteLinear(_) => [
                vec![0],
                vec![1, 3],
                vec![0, 1],
                vec![1, 3],
                vec![1, 3],
            ],
            ScenarioKind::BteNonlinear(_) => {
                [vec![2], vec![0], vec![1], vec![3], vec![2]]
            }
            ScenarioKind::Custom(c) => std::array::from_fn(|k| c.predictors[k].informative()),
        }
    }
}

/// Latent AR(1) Gaussian covariates mapped to (0,1); column-major.
pub fn gen_covariates(n: usize, p: usize, rho: f64, seed: u64) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = par::map_indexed(n, |i| {
        let mut rng = row_rng(seed, i);
        covariate_row(&mut rng, p, rho)
    });
    let mut cols = vec![vec![0.0; n]; p];
    for (i, row) in rows.iter().enumerate() {
        for j in 0..p {
            cols[j][i] = row[j];
        }
    }
    cols
}

fn row_rng(seed: u64, row: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(row as u64 + 1);
    rng
}

fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    norm_quantile(rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS))
}

fn covariate_row<R: Rng>(rng: &mut R, p: usize, rho: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(p);
    let scale = (1.0 - rho * rho).sqrt();
    let mut z = std_normal(rng);
    row.push(norm_cdf(z));
    for _ in 1..p {
        z = rho * z + scale * std_normal(rng);
        row.push(norm_cdf(z));
    }
    row
}

/// Response functions applied without the fitting-side predictor clamp: the
/// generator follows the scenario equations exactly.
pub fn margin_params_raw(family: MarginFamily, eta1: f64, eta2: f64) -> MarginParams {
    let scale = match family {
        MarginFamily::LogNormal => eta1,
        _ => eta1.exp(),
    };
    MarginParams { scale, shape: eta2.exp() }
}

fn dependence_theta_raw(dep: &Dependence, eta: f64) -> f64 {
    match dep {
        Dependence::Independence => 0.0,
        Dependence::Copula(f) => match f.kind {
            CopulaKind::Gaussian => eta.tanh(),
            CopulaKind::Clayton => eta.exp(),
            CopulaKind::Gumbel | CopulaKind::Joe => 1.0 + eta.exp(),
            CopulaKind::Frank => {
                if eta == 0.0 {
                    1e-8
                } else {
                    eta
                }
            }
        },
    }
}

struct RowDraw {
    x: Vec<f64>,
    eta: [f64; 5],
    y1: f64,
    d1: u8,
    y2: f64,
    d2: u8,
}

/// Latent times and censoring draws of one row; SCR scenarios draw a single
/// shared censoring time (both slots equal).
struct CoreDraw {
    x: Vec<f64>,
    eta: [f64; 5],
    t1: f64,
    t2: f64,
    cens: [f64; 2],
}

fn draw_core(scenario: &DgpScenario, intercepts: &[f64; 5], i: usize) -> Result<CoreDraw> {
    let mut rng = row_rng(scenario.seed, i);
    let x = covariate_row(&mut rng, scenario.p, scenario.rho);
    let eta = scenario.eval_etas(&x, intercepts);
    let m1 = scenario.margin1();
    let m2 = scenario.margin2();
    let p1 = margin_params_raw(m1, eta[0], eta[1]);
    let p2 = margin_params_raw(m2, eta[2], eta[3]);

    let u1: f64 = rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS);
    let w: f64 = rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS);
    let u2 = match scenario.dependence() {
        Dependence::Independence => w,
        Dependence::Copula(fam) => {
            let th = dependence_theta_raw(&scenario.dependence(), eta[4]);
            fam.h_inverse(w, u1, th, Given::Given1)?
        }
    };
    let t1 = m1.quantile(u1, &p1)?;
    let t2 = m2.quantile(u2, &p2)?;

    let caps = scenario.censor_upper();
    let cens = if scenario.is_scr() {
        let c = caps[0] * rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS);
        [c, c]
    } else {
        let c1 = caps[0] * rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS);
        let c2 = caps[1] * rng.random::<f64>().clamp(U_EPS, 1.0 - U_EPS);
        [c1, c2]
    };
    Ok(CoreDraw { x, eta, t1, t2, cens })
}

fn draw_row(scenario: &DgpScenario, intercepts: &[f64; 5], i: usize) -> Result<RowDraw> {
    let c = draw_core(scenario, intercepts, i)?;
    if scenario.is_scr() {
        let cens = c.cens[0];
        let y1 = c.t1.min(c.t2).min(cens);
        let d1 = u8::from(c.t1 <= c.t2.min(cens));
        let y2 = c.t2.min(cens);
        let d2 = u8::from(c.t2 <= cens);
        Ok(RowDraw { x: c.x, eta: c.eta, y1, d1, y2, d2 })
    } else {
        let y1 = c.t1.min(c.cens[0]);
        let d1 = u8::from(c.t1 <= c.cens[0]);
        let y2 = c.t2.min(c.cens[1]);
        let d2 = u8::from(c.t2 <= c.cens[1]);
        Ok(RowDraw { x: c.x, eta: c.eta, y1, d1, y2, d2 })
    }
}

/// Scale-intercept calibration: event times scale by exp(intercept) in all
/// three margin families, so every censoring rate is monotone in its scale
/// intercept and scalar bisection on a fixed calibration sample pins it.
/// BTE margins are independent; under SCR the terminal margin is calibrated
/// first and the non-terminal rate then depends on min(T2, censor).
fn calibrate_intercepts(scenario: &DgpScenario, targets: [f64; 2]) -> Result<[f64; 5]> {
    let mut base = scenario.base_intercepts();
    let calib = DgpScenario {
        kind: scenario.kind.clone(),
        n: CALIBRATION_N,
        p: scenario.p.max(4),
        rho: scenario.rho,
        seed: CALIBRATION_SEED,
    };
    let mut t1 = Vec::with_capacity(CALIBRATION_N);
    let mut t2 = Vec::with_capacity(CALIBRATION_N);
    let mut cens = Vec::with_capacity(CALIBRATION_N);
    for i in 0..CALIBRATION_N {
        let c = draw_core(&calib, &base, i)?;
        t1.push(c.t1);
        t2.push(c.t2);
        cens.push(c.cens);
    }
    let bisect_rate = |rate: &dyn Fn(f64) -> f64, target: f64| -> f64 {
        let (mut lo, mut hi) = (-8.0f64, 8.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if rate(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };

    // Terminal / second margin: P(e^b T2 > C2) = target2.
    let rate2 = |b: f64| -> f64 {
        let c = (0..CALIBRATION_N).filter(|&i| b.exp() * t2[i] > cens[i][1]).count();
        c as f64 / CALIBRATION_N as f64
    };
    let b2 = bisect_rate(&rate2, targets[1]);
    base[2] += b2;

    // First margin; under SCR the terminal event also censors it.
    let rate1 = |b: f64| -> f64 {
        let c = (0..CALIBRATION_N)
            .filter(|&i| {
                let bound = if scenario.is_scr() {
                    (b2.exp() * t2[i]).min(cens[i][0])
                } else {
                    cens[i][0]
                };
                b.exp() * t1[i] > bound
            })
            .count();
        c as f64 / CALIBRATION_N as f64
    };
    base[0] += bisect_rate(&rate1, targets[0]);
    Ok(base)
}

/// Generate a dataset plus its truth record.
pub fn generate(scenario: &DgpScenario) -> Result<SimOutput> {
    if scenario.n == 0 {
        return Err(Error::Config("scenario needs n >= 1".into()));
    }
    if scenario.p < scenario.min_p() {
        return Err(Error::Config(format!(
            "scenario '{}' needs at least {} covariates, got {}",
            scenario.name(),
            scenario.min_p(),
            scenario.p
        )));
    }
    if scenario.rho.abs() >= 1.0 {
        return Err(Error::Config("rho must satisfy |rho| < 1".into()));
    }
    let intercepts = match &scenario.kind {
        ScenarioKind::BteLinear(regime) => {
            let target = match regime {
                CensoringRegime::Mild => 0.3,
                CensoringRegime::Heavy => 0.7,
            };
            calibrate_intercepts(scenario, [target, target])?
        }
        // The SCR scale intercepts are likewise calibrated to the target
        // censoring regime (40% non-terminal, 47% terminal).
        ScenarioKind::Scr => calibrate_intercepts(scenario, [0.40, 0.47])?,
        _ => scenario.base_intercepts(),
    };

    let rows: Vec<Result<RowDraw>> =
        par::map_indexed(scenario.n, |i| draw_row(scenario, &intercepts, i));
    let mut columns = vec![vec![0.0; scenario.n]; scenario.p];
    let mut eta: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; scenario.n]);
    let mut times1 = vec![0.0; scenario.n];
    let mut status1 = vec![0u8; scenario.n];
    let mut times2 = vec![0.0; scenario.n];
    let mut status2 = vec![0u8; scenario.n];
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for j in 0..scenario.p {
            columns[j][i] = row.x[j];
        }
        for k in 0..5 {
            eta[k][i] = row.eta[k];
        }
        times1[i] = row.y1;
        status1[i] = row.d1;
        times2[i] = row.y2;
        status2[i] = row.d2;
    }
    let names: Vec<String> = (1..=scenario.p).map(|j| format!("x{j}")).collect();
    let censoring_rate1 =
        status1.iter().filter(|&&d| d == 0).count() as f64 / scenario.n as f64;
    let censoring_rate2 =
        status2.iter().filter(|&&d| d == 0).count() as f64 / scenario.n as f64;
    let dataset = BivariateSurvDataset::new(
        times1,
        status1,
        times2,
        status2,
        names,
        columns,
        scenario.is_scr(),
    )?;
    let truth = TruthRecord {
        scenario: scenario.name(),
        n: scenario.n,
        p: scenario.p,
        rho: scenario.rho,
        seed: scenario.seed,
        margin1: scenario.margin1(),
        margin2: scenario.margin2(),
        dependence: scenario.dependence(),
        informative: scenario.informative_sets(),
        intercepts,
        eta,
        censoring_rate1,
        censoring_rate2,
    };
    Ok(SimOutput { dataset, truth })
}
