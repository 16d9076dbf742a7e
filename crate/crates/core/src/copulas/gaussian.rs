//! Gaussian copula: C(u,v) = Phi2(Phi^-1(u), Phi^-1(v); theta) with theta
//! in [-1, 1] and the atanh link.

use super::BaseEval;
use crate::num::{binorm_cdf, norm_cdf, norm_log_cdf, norm_log_pdf, norm_quantile};

pub fn cdf(u: f64, v: f64, th: f64) -> f64 {
    binorm_cdf(norm_quantile(u), norm_quantile(v), th)
}

/// dC/du = Phi((y - theta x) / sqrt(1 - theta^2)).
pub fn h1(u: f64, v: f64, th: f64) -> f64 {
    let x = norm_quantile(u);
    let y = norm_quantile(v);
    let sq = (1.0 - th * th).sqrt();
    norm_cdf((y - th * x) / sq)
}

pub fn log_pdf(u: f64, v: f64, th: f64) -> f64 {
    let x = norm_quantile(u);
    let y = norm_quantile(v);
    let s = 1.0 - th * th;
    -0.5 * s.ln() - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * s)
}

/// Closed-form conditional inverse: solve Phi((y - theta x)/sq) = w for v.
pub fn h1_inverse(w: f64, u: f64, th: f64) -> f64 {
    let x = norm_quantile(u);
    let sq = (1.0 - th * th).sqrt();
    let y = norm_quantile(w) * sq + th * x;
    norm_cdf(y)
}

pub fn eval(u: f64, v: f64, th: f64) -> BaseEval {
    let x = norm_quantile(u);
    let y = norm_quantile(v);
    let s = 1.0 - th * th;
    let sq = s.sqrt();
    let log_phi_x = norm_log_pdf(x);
    let log_phi_y = norm_log_pdf(y);
    // Conditional z-scores and their log-Phi values.
    let ku = (y - th * x) / sq;
    let kv = (x - th * y) / sq;
    let log_h1 = norm_log_cdf(ku);
    let log_h2 = norm_log_cdf(kv);
    let log_pdf = -0.5 * s.ln() - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * s);
    let log_cdf = binorm_cdf(x, y, th).max(1e-300).ln();

    // phi(k)/Phi(k) ratios, stable deep in the tails.
    let mills_u = (norm_log_pdf(ku) - log_h1).exp();
    let mills_v = (norm_log_pdf(kv) - log_h2).exp();
    let inv_phi_x = (-log_phi_x).exp();
    let inv_phi_y = (-log_phi_y).exp();

    BaseEval {
        log_cdf,
        log_h1,
        log_h2,
        log_pdf,
        dlog_h1_du: -th / sq * mills_u * inv_phi_x,
        dlog_h2_dv: -th / sq * mills_v * inv_phi_y,
        dlog_pdf_du: th * ku / sq * inv_phi_x,
        dlog_pdf_dv: th * kv / sq * inv_phi_y,
        // dC/dtheta is the bivariate normal density at (x, y).
        dlog_cdf_dth: (log_pdf + log_phi_x + log_phi_y - log_cdf).exp(),
        dlog_h1_dth: mills_u * (th * y - x) / (s * sq),
        dlog_h2_dth: mills_v * (th * x - y) / (s * sq),
        dlog_pdf_dth: th / s + (x * y * (1.0 + th * th) - th * (x * x + y * y)) / (s * s),
    }
}
