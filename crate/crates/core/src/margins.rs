//! Parametric marginal survival distributions for accelerated failure time
//! models: Weibull, log-normal and log-logistic.
//!
//! Every family has two parameters. `scale` plays the role of a time scale
//! (for the log-normal it is the mean of log-time and is linked with the
//! identity; everywhere else the link is log) and `shape` is strictly
//! positive with a log link throughout. Survival and density are computed on
//! the log scale internally and exponentiated last, since censored
//! likelihoods sum logs of tiny survival values.
//!
//! The exponential distribution is the Weibull with `shape = 1` and is not a
//! separate family.

use crate::error::{Error, Result};
use crate::num::{norm_log_cdf, norm_log_pdf, norm_quantile};
use crate::ETA_CLAMP;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginFamily {
    Weibull,
    LogNormal,
    LogLogistic,
}

/// Natural-scale parameters of a margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginParams {
    /// Time scale; for the log-normal, the mean of log-time (any real).
    pub scale: f64,
    /// Strictly positive shape; for the log-normal, the sd of log-time.
    pub shape: f64,
}

/// Derivatives of log S, log f and S with respect to the two link-scale
/// predictors (scale predictor first).
#[derive(Debug, Clone, Copy)]
pub struct MarginPartials {
    pub dlogs_deta: [f64; 2],
    pub dlogf_deta: [f64; 2],
    pub ds_deta: [f64; 2],
}

/// Everything the censored likelihood needs at one observation.
#[derive(Debug, Clone, Copy)]
pub struct MarginEval {
    pub log_s: f64,
    pub log_f: f64,
    pub dlogs_deta: [f64; 2],
    pub dlogf_deta: [f64; 2],
}

impl MarginFamily {
    pub const ALL: [MarginFamily; 3] = [
        MarginFamily::Weibull,
        MarginFamily::LogNormal,
        MarginFamily::LogLogistic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MarginFamily::Weibull => "weibull",
            MarginFamily::LogNormal => "lognormal",
            MarginFamily::LogLogistic => "loglogistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weibull" => Ok(MarginFamily::Weibull),
            "lognormal" | "log-normal" => Ok(MarginFamily::LogNormal),
            "loglogistic" | "log-logistic" => Ok(MarginFamily::LogLogistic),
            other => Err(Error::Config(format!("unknown margin family '{other}'"))),
        }
    }

    /// Map link-scale predictors to natural parameters. Exponential-type
    /// links clamp the predictor to +-ETA_CLAMP first.
    pub fn response(&self, eta_scale: f64, eta_shape: f64) -> MarginParams {
        let scale = match self {
            MarginFamily::LogNormal => eta_scale,
            _ => eta_scale.clamp(-ETA_CLAMP, ETA_CLAMP).exp(),
        };
        let shape = eta_shape.clamp(-ETA_CLAMP, ETA_CLAMP).exp();
        MarginParams { scale, shape }
    }

    /// Inverse of [`response`](Self::response).
    pub fn link(&self, p: &MarginParams) -> (f64, f64) {
        let eta_scale = match self {
            MarginFamily::LogNormal => p.scale,
            _ => p.scale.ln(),
        };
        (eta_scale, p.shape.ln())
    }

    fn validate(&self, t: f64, p: &MarginParams) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        if !(p.shape > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shape must be positive, got {}",
                p.shape
            )));
        }
        match self {
            MarginFamily::LogNormal => {
                if !p.scale.is_finite() {
                    return Err(Error::InvalidParameter("scale must be finite".into()));
                }
            }
            _ => {
                if !(p.scale > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "scale must be positive, got {}",
                        p.scale
                    )));
                }
            }
        }
        Ok(())
    }

    /// S(t) in (0, 1].
    pub fn survival(&self, t: f64, p: &MarginParams) -> Result<f64> {
        self.validate(t, p)?;
        Ok(self.log_survival_unchecked(t, p).exp())
    }

    /// f(t) = -dS/dt.
    pub fn density(&self, t: f64, p: &MarginParams) -> Result<f64> {
        self.validate(t, p)?;
        Ok(self.log_density_unchecked(t, p).exp())
    }

    pub fn log_survival(&self, t: f64, p: &MarginParams) -> Result<f64> {
        self.validate(t, p)?;
        Ok(self.log_survival_unchecked(t, p))
    }

    pub fn log_density(&self, t: f64, p: &MarginParams) -> Result<f64> {
        self.validate(t, p)?;
        Ok(self.log_density_unchecked(t, p))
    }

    fn log_survival_unchecked(&self, t: f64, p: &MarginParams) -> f64 {
        match self {
            MarginFamily::Weibull => -pow_ratio(t, p),
            MarginFamily::LogNormal => norm_log_cdf(-z_score(t, p)),
            MarginFamily::LogLogistic => {
                // The tabulated 1 - 1/(1 + (t/scale)^{-shape}) simplifies to
                // 1/(1 + (t/scale)^{shape}).
                -softplus(p.shape * (t / p.scale).ln())
            }
        }
    }

    fn log_density_unchecked(&self, t: f64, p: &MarginParams) -> f64 {
        match self {
            MarginFamily::Weibull => {
                let lr = (t / p.scale).ln();
                p.shape.ln() - p.scale.ln() + (p.shape - 1.0) * lr - pow_ratio(t, p)
            }
            MarginFamily::LogNormal => {
                let z = z_score(t, p);
                norm_log_pdf(z) - t.ln() - p.shape.ln()
            }
            MarginFamily::LogLogistic => {
                let lw = p.shape * (t / p.scale).ln();
                p.shape.ln() + lw - t.ln() - 2.0 * softplus(lw)
            }
        }
    }

    /// Inverse survival: the time t with S(t) = u.
    pub fn quantile(&self, u: f64, p: &MarginParams) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "survival level must be in (0,1), got {u}"
            )));
        }
        self.validate(1.0, p)?;
        Ok(match self {
            MarginFamily::Weibull => p.scale * (-u.ln()).powf(1.0 / p.shape),
            MarginFamily::LogNormal => (p.scale + p.shape * norm_quantile(1.0 - u)).exp(),
            MarginFamily::LogLogistic => p.scale * ((1.0 - u) / u).powf(1.0 / p.shape),
        })
    }

    /// Analytic chain-rule partials of log S, log f and S with respect to the
    /// link-scale predictors.
    pub fn partials(&self, t: f64, eta_scale: f64, eta_shape: f64) -> MarginPartials {
        let e = self.eval(t, eta_scale, eta_shape);
        let s = e.log_s.exp();
        MarginPartials {
            dlogs_deta: e.dlogs_deta,
            dlogf_deta: e.dlogf_deta,
            ds_deta: [s * e.dlogs_deta[0], s * e.dlogs_deta[1]],
        }
    }

    /// log S, log f and their predictor partials in one pass.
    pub fn eval(&self, t: f64, eta_scale: f64, eta_shape: f64) -> MarginEval {
        let p = self.response(eta_scale, eta_shape);
        match self {
            MarginFamily::Weibull => {
                let lr = (t / p.scale).ln();
                let w = pow_ratio(t, &p);
                MarginEval {
                    log_s: -w,
                    log_f: p.shape.ln() - p.scale.ln() + (p.shape - 1.0) * lr - w,
                    dlogs_deta: [p.shape * w, -p.shape * w * lr],
                    dlogf_deta: [p.shape * (w - 1.0), 1.0 + p.shape * lr * (1.0 - w)],
                }
            }
            MarginFamily::LogNormal => {
                let z = z_score(t, &p);
                let log_s = norm_log_cdf(-z);
                // phi(z)/Phi(-z), the inverse Mills ratio, on the log scale.
                let mills = (norm_log_pdf(z) - log_s).exp();
                MarginEval {
                    log_s,
                    log_f: norm_log_pdf(z) - t.ln() - p.shape.ln(),
                    dlogs_deta: [mills / p.shape, z * mills],
                    dlogf_deta: [z / p.shape, z * z - 1.0],
                }
            }
            MarginFamily::LogLogistic => {
                let lr = (t / p.scale).ln();
                let lw = p.shape * lr;
                let big_f = sigmoid(lw);
                MarginEval {
                    log_s: -softplus(lw),
                    log_f: p.shape.ln() + lw - t.ln() - 2.0 * softplus(lw),
                    dlogs_deta: [p.shape * big_f, -p.shape * big_f * lr],
                    dlogf_deta: [
                        p.shape * (2.0 * big_f - 1.0),
                        1.0 + p.shape * lr * (1.0 - 2.0 * big_f),
                    ],
                }
            }
        }
    }
}

fn z_score(t: f64, p: &MarginParams) -> f64 {
    (t.ln() - p.scale) / p.shape
}

/// (t/scale)^shape with a saturating exponent so extreme shapes yield +inf
/// instead of NaN.
fn pow_ratio(t: f64, p: &MarginParams) -> f64 {
    let e = p.shape * (t / p.scale).ln();
    if e > 709.0 {
        f64::INFINITY
    } else {
        e.exp()
    }
}

/// ln(1 + e^x), overflow-safe.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
