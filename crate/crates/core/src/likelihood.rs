//! Censored bivariate log-likelihood and its predictor-scale gradients.
//!
//! Each observation contributes through exactly one of four branches keyed
//! by the censoring pair (status 1 = event observed):
//!
//! - (0,0): log C(S1, S2)
//! - (0,1): log dC/dS2 + log f2
//! - (1,0): log dC/dS1 + log f1
//! - (1,1): log c + log f1 + log f2
//!
//! The partial derivatives dC/dS1, dC/dS2 are exactly the copula
//! h-functions evaluated at (S1, S2). Survival values are nudged into
//! [U_EPS, 1-U_EPS] before entering the copula. Gradients are returned raw
//! (unstabilized) so they stay comparable with finite differences;
//! stabilization is the boosting engine's concern.

use crate::copulas::CopulaFamily;
use crate::dataset::BivariateSurvDataset;
use crate::error::{Error, Result};
use crate::margins::MarginFamily;
use crate::par;
use crate::U_EPS;
use serde::{Deserialize, Serialize};

pub const N_PARAMS: usize = 5;

/// The five distribution parameters, in predictor-array order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamId {
    Margin1Scale,
    Margin1Shape,
    Margin2Scale,
    Margin2Shape,
    Dependence,
}

impl ParamId {
    pub const ALL: [ParamId; 5] = [
        ParamId::Margin1Scale,
        ParamId::Margin1Shape,
        ParamId::Margin2Scale,
        ParamId::Margin2Shape,
        ParamId::Dependence,
    ];

    pub fn index(&self) -> usize {
        match self {
            ParamId::Margin1Scale => 0,
            ParamId::Margin1Shape => 1,
            ParamId::Margin2Scale => 2,
            ParamId::Margin2Shape => 3,
            ParamId::Dependence => 4,
        }
    }

    pub fn from_index(i: usize) -> ParamId {
        ParamId::ALL[i]
    }

    /// GAMLSS-style label used in reports and configs.
    pub fn label(&self) -> &'static str {
        match self {
            ParamId::Margin1Scale => "margin1.mu",
            ParamId::Margin1Shape => "margin1.sigma",
            ParamId::Margin2Scale => "margin2.mu",
            ParamId::Margin2Shape => "margin2.sigma",
            ParamId::Dependence => "dependence",
        }
    }
}

/// Dependence structure of the joint model: a parametric copula or the
/// product (independence) pseudo-family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dependence {
    Independence,
    Copula(CopulaFamily),
}

impl Dependence {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("independence") {
            Ok(Dependence::Independence)
        } else {
            Ok(Dependence::Copula(CopulaFamily::parse(s)?))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Dependence::Independence => "independence".into(),
            Dependence::Copula(f) => f.name(),
        }
    }
}

/// Per-observation link-scale predictors for all five parameters, plus the
/// natural-scale values implied by the model's links.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSurface {
    pub eta: [Vec<f64>; N_PARAMS],
}

impl ParameterSurface {
    pub fn constant(n: usize, values: [f64; N_PARAMS]) -> Self {
        ParameterSurface { eta: values.map(|v| vec![v; n]) }
    }

    pub fn n(&self) -> usize {
        self.eta[0].len()
    }

    pub fn row(&self, i: usize) -> [f64; N_PARAMS] {
        [
            self.eta[0][i],
            self.eta[1][i],
            self.eta[2][i],
            self.eta[3][i],
            self.eta[4][i],
        ]
    }

    /// Natural-scale parameter values for observation i.
    pub fn theta_row(
        &self,
        i: usize,
        m1: MarginFamily,
        m2: MarginFamily,
        dep: &Dependence,
    ) -> [f64; N_PARAMS] {
        let e = self.row(i);
        let p1 = m1.response(e[0], e[1]);
        let p2 = m2.response(e[2], e[3]);
        let th = match dep {
            Dependence::Independence => 0.0,
            Dependence::Copula(f) => f.response(e[4]),
        };
        [p1.scale, p1.shape, p2.scale, p2.shape, th]
    }
}

/// Log-likelihood of one univariate right-censored observation:
/// delta log f + (1 - delta) log S.
pub fn loglik_univariate(y: f64, delta: u8, family: MarginFamily, eta1: f64, eta2: f64) -> f64 {
    let e = family.eval(y, eta1, eta2);
    if delta == 1 {
        e.log_f
    } else {
        e.log_s
    }
}

/// Gradient of [`loglik_univariate`] in (eta1, eta2).
pub fn grad_univariate(y: f64, delta: u8, family: MarginFamily, eta1: f64, eta2: f64) -> [f64; 2] {
    let e = family.eval(y, eta1, eta2);
    if delta == 1 {
        e.dlogf_deta
    } else {
        e.dlogs_deta
    }
}

/// One observation's contribution to the bivariate censored log-likelihood.
pub fn loglik_bivariate(
    y1: f64,
    d1: u8,
    y2: f64,
    d2: u8,
    m1: MarginFamily,
    m2: MarginFamily,
    dep: &Dependence,
    eta: &[f64; N_PARAMS],
) -> f64 {
    let e1 = m1.eval(y1, eta[0], eta[1]);
    let e2 = m2.eval(y2, eta[2], eta[3]);
    match dep {
        Dependence::Independence => {
            let a = if d1 == 1 { e1.log_f } else { e1.log_s };
            let b = if d2 == 1 { e2.log_f } else { e2.log_s };
            a + b
        }
        Dependence::Copula(fam) => {
            let th = fam.response(eta[4]);
            let u1 = e1.log_s.exp().clamp(U_EPS, 1.0 - U_EPS);
            let u2 = e2.log_s.exp().clamp(U_EPS, 1.0 - U_EPS);
            match (d1, d2) {
                (0, 0) => fam.cdf(u1, u2, th).map(|c| c.max(1e-300).ln()).unwrap_or(f64::NAN),
                (0, 1) => {
                    let h2 = fam
                        .h_function(u1, u2, th, crate::copulas::Given::Given2)
                        .unwrap_or(f64::NAN);
                    h2.max(1e-300).ln() + e2.log_f
                }
                (1, 0) => {
                    let h1 = fam
                        .h_function(u1, u2, th, crate::copulas::Given::Given1)
                        .unwrap_or(f64::NAN);
                    h1.max(1e-300).ln() + e1.log_f
                }
                _ => fam.log_density(u1, u2, th).unwrap_or(f64::NAN) + e1.log_f + e2.log_f,
            }
        }
    }
}

/// Log-likelihood and its gradient with respect to all five link-scale
/// predictors in one pass.
pub fn loglik_grad_bivariate(
    y1: f64,
    d1: u8,
    y2: f64,
    d2: u8,
    m1: MarginFamily,
    m2: MarginFamily,
    dep: &Dependence,
    eta: &[f64; N_PARAMS],
) -> (f64, [f64; N_PARAMS]) {
    let e1 = m1.eval(y1, eta[0], eta[1]);
    let e2 = m2.eval(y2, eta[2], eta[3]);
    let mut grad = [0.0; N_PARAMS];

    match dep {
        Dependence::Independence => {
            let (l1, g1) = if d1 == 1 {
                (e1.log_f, e1.dlogf_deta)
            } else {
                (e1.log_s, e1.dlogs_deta)
            };
            let (l2, g2) = if d2 == 1 {
                (e2.log_f, e2.dlogf_deta)
            } else {
                (e2.log_s, e2.dlogs_deta)
            };
            grad[0] = g1[0];
            grad[1] = g1[1];
            grad[2] = g2[0];
            grad[3] = g2[1];
            (l1 + l2, grad)
        }
        Dependence::Copula(fam) => {
            let s1 = e1.log_s.exp();
            let s2 = e2.log_s.exp();
            let u1 = s1.clamp(U_EPS, 1.0 - U_EPS);
            let u2 = s2.clamp(U_EPS, 1.0 - U_EPS);
            let ce = fam.eval_link(u1, u2, eta[4]);
            let ds1 = [s1 * e1.dlogs_deta[0], s1 * e1.dlogs_deta[1]];
            let ds2 = [s2 * e2.dlogs_deta[0], s2 * e2.dlogs_deta[1]];
            let (value, du1, du2, dth) = match (d1, d2) {
                (0, 0) => (ce.log_cdf, ce.dlog_cdf_du1, ce.dlog_cdf_du2, ce.dlog_cdf_dth),
                (0, 1) => (ce.log_h2 + e2.log_f, ce.dlog_h2_du1, ce.dlog_h2_du2, ce.dlog_h2_dth),
                (1, 0) => (ce.log_h1 + e1.log_f, ce.dlog_h1_du1, ce.dlog_h1_du2, ce.dlog_h1_dth),
                _ => (
                    ce.log_pdf + e1.log_f + e2.log_f,
                    ce.dlog_pdf_du1,
                    ce.dlog_pdf_du2,
                    ce.dlog_pdf_dth,
                ),
            };
            grad[0] = du1 * ds1[0];
            grad[1] = du1 * ds1[1];
            grad[2] = du2 * ds2[0];
            grad[3] = du2 * ds2[1];
            grad[4] = dth;
            if d1 == 1 {
                grad[0] += e1.dlogf_deta[0];
                grad[1] += e1.dlogf_deta[1];
            }
            if d2 == 1 {
                grad[2] += e2.dlogf_deta[0];
                grad[3] += e2.dlogf_deta[1];
            }
            (value, grad)
        }
    }
}

/// Negative-gradient (pseudo-residual) vector for one parameter over all
/// observations: entry i = +d l_i / d eta. Non-finite entries are reported
/// with their observation index.
pub fn neg_gradients_bivariate(
    data: &BivariateSurvDataset,
    m1: MarginFamily,
    m2: MarginFamily,
    dep: &Dependence,
    surface: &ParameterSurface,
    which: ParamId,
) -> Result<Vec<f64>> {
    let k = which.index();
    let g = par::map_indexed(data.n(), |i| {
        let eta = surface.row(i);
        loglik_grad_bivariate(
            data.times1[i],
            data.status1[i],
            data.times2[i],
            data.status2[i],
            m1,
            m2,
            dep,
            &eta,
        )
        .1[k]
    });
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLikelihood {
            index: i,
            context: format!("gradient of {}", which.label()),
        });
    }
    Ok(g)
}

/// Mean negative log-likelihood over the observations selected by 0/1
/// weights. +inf values are kept (an impossible observation under the
/// current fit); NaN is reported with its index.
pub fn empirical_risk(
    data: &BivariateSurvDataset,
    m1: MarginFamily,
    m2: MarginFamily,
    dep: &Dependence,
    surface: &ParameterSurface,
    weights: &[u8],
) -> Result<f64> {
    let count = weights.iter().filter(|&&w| w == 1).count();
    if count == 0 {
        return Err(Error::Dataset("empty selection in empirical risk".into()));
    }
    let total = par::chunked_sum(data.n(), |i| {
        if weights[i] == 0 {
            return 0.0;
        }
        let eta = surface.row(i);
        -loglik_bivariate(
            data.times1[i],
            data.status1[i],
            data.times2[i],
            data.status2[i],
            m1,
            m2,
            dep,
            &eta,
        )
    });
    if total.is_nan() {
        for i in 0..data.n() {
            if weights[i] == 1 {
                let eta = surface.row(i);
                let l = loglik_bivariate(
                    data.times1[i],
                    data.status1[i],
                    data.times2[i],
                    data.status2[i],
                    m1,
                    m2,
                    dep,
                    &eta,
                );
                if l.is_nan() {
                    return Err(Error::NonFiniteLikelihood {
                        index: i,
                        context: "bivariate log-likelihood".into(),
                    });
                }
            }
        }
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::{CopulaKind, Given, Rotation};
    use rand::prelude::*;

    const WEIB: MarginFamily = MarginFamily::Weibull;

    fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
        (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
    }

    fn clayton() -> Dependence {
        Dependence::Copula(CopulaFamily { kind: CopulaKind::Clayton, rotation: Rotation::None })
    }

    #[test]
    fn uncensored_independence_is_density_sum() {
        let eta = [0.0, 0.0, 0.3, -0.2];
        let l = loglik_bivariate(
            1.0,
            1,
            2.0,
            1,
            WEIB,
            MarginFamily::LogLogistic,
            &Dependence::Independence,
            &[eta[0], eta[1], eta[2], eta[3], 0.0],
        );
        let f1 = WEIB.eval(1.0, eta[0], eta[1]).log_f;
        let f2 = MarginFamily::LogLogistic.eval(2.0, eta[2], eta[3]).log_f;
        assert!((l - (f1 + f2)).abs() < 1e-14);
    }

    #[test]
    fn censored_independence_is_survival_sum() {
        let l = loglik_bivariate(
            1.0,
            0,
            1.0,
            0,
            WEIB,
            WEIB,
            &Dependence::Independence,
            &[0.0, 0.0, 0.0, 0.0, 0.0],
        );
        // Weibull(1,1): log S(1) = -1 for both margins.
        assert!((l + 2.0).abs() < 1e-14);
    }

    #[test]
    fn branch_10_composes_h_and_density() {
        // delta = (1,0), Clayton theta = 2, unit-exponential margins at
        // y = (1,1): l = log h1(e^-1, e^-1) + log f1(1).
        let dep = clayton();
        let th: f64 = 2.0;
        let eta_c = th.ln();
        let l = loglik_bivariate(1.0, 1, 1.0, 0, WEIB, WEIB, &dep, &[0.0, 0.0, 0.0, 0.0, eta_c]);
        let s = (-1.0f64).exp();
        let fam = CopulaFamily { kind: CopulaKind::Clayton, rotation: Rotation::None };
        let oracle = fam.h_function(s, s, th, Given::Given1).unwrap().ln()
            + WEIB.eval(1.0, 0.0, 0.0).log_f;
        assert!((l - oracle).abs() < 1e-12);
    }

    #[test]
    fn univariate_fixed_points() {
        // Exponential margin: log f(1) = -1, log S(1) = -1.
        assert!((loglik_univariate(1.0, 1, WEIB, 0.0, 0.0) + 1.0).abs() < 1e-14);
        assert!((loglik_univariate(1.0, 0, WEIB, 0.0, 0.0) + 1.0).abs() < 1e-14);
        // Log-logistic at its scale: log S = log 0.5.
        let ll = loglik_univariate(1.0, 0, MarginFamily::LogLogistic, 0.0, 0.4);
        assert!((ll - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn gradients_match_finite_differences_across_branches() {
        let mut rng = StdRng::seed_from_u64(17);
        let margins = MarginFamily::ALL;
        let deps: Vec<Dependence> = CopulaFamily::all()
            .into_iter()
            .map(Dependence::Copula)
            .chain([Dependence::Independence])
            .collect();
        let step = 1e-6;
        for dep in &deps {
            for _ in 0..8 {
                let m1 = margins[rng.random_range(0..3)];
                let m2 = margins[rng.random_range(0..3)];
                for (d1, d2) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                    let eta = [
                        rng.random_range(-0.8..0.8),
                        rng.random_range(-0.6..0.6),
                        rng.random_range(-0.8..0.8),
                        rng.random_range(-0.6..0.6),
                        rng.random_range(-0.9..0.9),
                    ];
                    let p1 = m1.response(eta[0], eta[1]);
                    let p2 = m2.response(eta[2], eta[3]);
                    let y1 = m1.quantile(rng.random_range(0.05..0.95), &p1).unwrap();
                    let y2 = m2.quantile(rng.random_range(0.05..0.95), &p2).unwrap();
                    let (_, grad) = loglik_grad_bivariate(y1, d1, y2, d2, m1, m2, dep, &eta);
                    for k in 0..N_PARAMS {
                        if k == 4 && matches!(dep, Dependence::Independence) {
                            assert_eq!(grad[4], 0.0);
                            continue;
                        }
                        let mut up = eta;
                        up[k] += step;
                        let mut dn = eta;
                        dn[k] -= step;
                        let fd = (loglik_bivariate(y1, d1, y2, d2, m1, m2, dep, &up)
                            - loglik_bivariate(y1, d1, y2, d2, m1, m2, dep, &dn))
                            / (2.0 * step);
                        assert!(
                            rel_close(grad[k], fd, 1e-5),
                            "{} {:?}/{:?} d=({d1},{d2}) k={k}: {} vs {}",
                            dep.name(),
                            m1,
                            m2,
                            grad[k],
                            fd
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn copula_loglik_converges_to_independence() {
        // As theta approaches the independence point the bivariate
        // log-likelihood approaches the sum of univariate ones.
        let cases = [
            (CopulaKind::Gaussian, 1e-5),
            (CopulaKind::Frank, 1e-5),
            (CopulaKind::Clayton, 1e-5),
        ];
        for (kind, th) in cases {
            let fam = CopulaFamily { kind, rotation: Rotation::None };
            let dep = Dependence::Copula(fam);
            let eta_c = fam.link(th);
            for (d1, d2) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                let eta = [0.1, -0.1, 0.2, 0.0, eta_c];
                let l = loglik_bivariate(0.7, d1, 1.3, d2, WEIB, WEIB, &dep, &eta);
                let ind = loglik_bivariate(
                    0.7,
                    d1,
                    1.3,
                    d2,
                    WEIB,
                    WEIB,
                    &Dependence::Independence,
                    &eta,
                );
                assert!((l - ind).abs() < 1e-4, "{kind:?} d=({d1},{d2}): {l} vs {ind}");
            }
        }
    }

    #[test]
    fn uncensored_likelihood_decomposes() {
        // With all events observed: bivariate NLL = NLL1 + NLL2 - sum log c.
        let dep = clayton();
        let eta = [0.2, 0.1, -0.1, 0.05, 0.3];
        let (y1, y2) = (0.9, 1.7);
        let l = loglik_bivariate(y1, 1, y2, 1, WEIB, WEIB, &dep, &eta);
        let l1 = loglik_univariate(y1, 1, WEIB, eta[0], eta[1]);
        let l2 = loglik_univariate(y2, 1, WEIB, eta[2], eta[3]);
        let fam = CopulaFamily { kind: CopulaKind::Clayton, rotation: Rotation::None };
        let th = fam.response(eta[4]);
        let u1 = WEIB.eval(y1, eta[0], eta[1]).log_s.exp();
        let u2 = WEIB.eval(y2, eta[2], eta[3]).log_s.exp();
        let logc = fam.log_density(u1, u2, th).unwrap();
        assert!((l - (l1 + l2 + logc)).abs() < 1e-12);
    }

    #[test]
    fn risk_mean_invariance_and_empty_selection() {
        let data = BivariateSurvDataset::new(
            vec![1.0, 2.0],
            vec![1, 0],
            vec![1.5, 2.5],
            vec![1, 1],
            vec![],
            vec![],
            false,
        )
        .unwrap();
        let surface = ParameterSurface::constant(2, [0.0, 0.0, 0.0, 0.0, 0.5]);
        let dep = clayton();
        let r = empirical_risk(&data, WEIB, WEIB, &dep, &surface, &[1, 1]).unwrap();
        // Duplicating the dataset leaves the mean risk unchanged.
        let data2 = BivariateSurvDataset::new(
            vec![1.0, 2.0, 1.0, 2.0],
            vec![1, 0, 1, 0],
            vec![1.5, 2.5, 1.5, 2.5],
            vec![1, 1, 1, 1],
            vec![],
            vec![],
            false,
        )
        .unwrap();
        let surface2 = ParameterSurface::constant(4, [0.0, 0.0, 0.0, 0.0, 0.5]);
        let r2 = empirical_risk(&data2, WEIB, WEIB, &dep, &surface2, &[1, 1, 1, 1]).unwrap();
        assert!((r - r2).abs() < 1e-12);
        // Single observation selected: risk is that observation's NLL.
        let r_single = empirical_risk(&data, WEIB, WEIB, &dep, &surface, &[1, 0]).unwrap();
        let l0 = loglik_bivariate(1.0, 1, 1.5, 1, WEIB, WEIB, &dep, &surface.row(0));
        assert!((r_single + l0).abs() < 1e-12);
        assert!(empirical_risk(&data, WEIB, WEIB, &dep, &surface, &[0, 0]).is_err());
    }

    #[test]
    fn branch_exclusivity() {
        // Indicator products across the four branches always sum to one.
        for (d1, d2) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
            let (a, b) = (d1 as f64, d2 as f64);
            let total = (1.0 - a) * (1.0 - b) + (1.0 - a) * b + a * (1.0 - b) + a * b;
            assert_eq!(total, 1.0);
        }
    }
}
