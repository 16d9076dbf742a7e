//! Frank copula: C(u,v) = -(1/theta) log(1 + (e^(-theta u)-1)(e^(-theta v)-1)
//! / (e^(-theta)-1)), theta in R without 0, identity link. No tail
//! dependence; the only implemented family with negative dependence and no
//! rotation.
//!
//! Everything is expressed through D = expm1(-theta) and
//! B = D + g(u) g(v) with g(x) = expm1(-theta x). The naive B cancels
//! catastrophically for large |theta|; the equivalent grouping
//! B = e^(-theta u) g(v) + e^(-theta v) g(1-v) adds terms of one sign and is
//! used instead. B always carries the sign of D.

use super::BaseEval;
use crate::copulas::debye1;
use libm::expm1;

struct Core {
    eu: f64,
    ev: f64,
    gu: f64,
    gv: f64,
    d: f64,
    b: f64,
}

impl Core {
    fn new(u: f64, v: f64, th: f64) -> Self {
        let eu = (-th * u).exp();
        let ev = (-th * v).exp();
        let gu = expm1(-th * u);
        let gv = expm1(-th * v);
        let d = expm1(-th);
        let b = eu * gv + ev * expm1(-th * (1.0 - v));
        Core { eu, ev, gu, gv, d, b }
    }
}

pub fn cdf(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    -(c.b / c.d).ln() / th
}

pub fn h1(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    c.eu * c.gv / c.b
}

pub fn log_pdf(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    (-th * c.d).ln() - th * (u + v) - 2.0 * c.b.abs().ln()
}

/// Closed-form conditional inverse.
pub fn h1_inverse(w: f64, u: f64, th: f64) -> f64 {
    let eu = (-th * u).exp();
    let d = expm1(-th);
    let g = w * d / ((1.0 - w) * eu + w);
    -g.ln_1p() / th
}

pub fn eval(u: f64, v: f64, th: f64) -> BaseEval {
    let c = Core::new(u, v, th);
    let log_ratio = (c.b / c.d).ln();
    let cdf_val = -log_ratio / th;
    let emt = (-th).exp();
    let db_du = -th * c.eu * c.gv;
    let db_dv = -th * c.ev * c.gu;
    let db_dth = -emt - u * c.eu * c.gv - v * c.ev * c.gu;
    let dcdf_dth = log_ratio / (th * th) - (db_dth / c.b - (-emt) / c.d) / th;

    BaseEval {
        log_cdf: cdf_val.max(1e-300).ln(),
        log_h1: -th * u + (c.gv / c.b).ln(),
        log_h2: -th * v + (c.gu / c.b).ln(),
        log_pdf: (-th * c.d).ln() - th * (u + v) - 2.0 * c.b.abs().ln(),
        dlog_h1_du: -th - db_du / c.b,
        dlog_h2_dv: -th - db_dv / c.b,
        dlog_pdf_du: -th - 2.0 * db_du / c.b,
        dlog_pdf_dv: -th - 2.0 * db_dv / c.b,
        dlog_cdf_dth: dcdf_dth / cdf_val,
        dlog_h1_dth: -u - v * c.ev / c.gv - db_dth / c.b,
        dlog_h2_dth: -v - u * c.eu / c.gu - db_dth / c.b,
        dlog_pdf_dth: 1.0 / th - emt / c.d - (u + v) - 2.0 * db_dth / c.b,
    }
}

/// Kendall's tau: 1 - (4/theta)(1 - D1(theta)) with the first Debye
/// function; antisymmetric in theta.
pub fn kendall_tau(th: f64) -> f64 {
    let a = th.abs();
    let tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    if th < 0.0 {
        -tau
    } else {
        tau
    }
}
