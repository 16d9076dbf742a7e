//! Joe copula: C(u,v) = 1 - (P + Q - PQ)^(1/theta) with P = (1-u)^theta,
//! Q = (1-v)^theta, theta >= 1, link log(theta - 1). Upper-tail dependent.

use super::BaseEval;
use crate::num::quad::adaptive_simpson;

struct Core {
    lp: f64,
    lq: f64,
    /// log(1 - P), log(1 - Q)
    l1p: f64,
    l1q: f64,
    log_a: f64,
}

impl Core {
    fn new(u: f64, v: f64, th: f64) -> Self {
        let lp = (-u).ln_1p(); // log(1 - u)
        let lq = (-v).ln_1p();
        let big_lp = th * lp;
        let big_lq = th * lq;
        let l1p = (-libm::expm1(big_lp)).ln();
        let l1q = (-libm::expm1(big_lq)).ln();
        // A = P + Q(1-P), both addends positive: logsumexp.
        let t1 = big_lp;
        let t2 = big_lq + l1p;
        let hi = t1.max(t2);
        let log_a = hi + ((t1 - hi).exp() + (t2 - hi).exp()).ln();
        Core { lp, lq, l1p, l1q, log_a }
    }

    /// P(1-Q)/A and Q(1-P)/A.
    fn ratios(&self, th: f64) -> (f64, f64) {
        let ru = (th * self.lp + self.l1q - self.log_a).exp();
        let rv = (th * self.lq + self.l1p - self.log_a).exp();
        (ru, rv)
    }
}

pub fn cdf(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    -libm::expm1(c.log_a / th)
}

pub fn h1(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    ((1.0 / th - 1.0) * c.log_a + (th - 1.0) * c.lp + c.l1q).exp()
}

pub fn log_pdf(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    let a = c.log_a.exp();
    (1.0 / th - 2.0) * c.log_a + (th - 1.0) * (c.lp + c.lq) + (th - 1.0 + a).ln()
}

pub fn eval(u: f64, v: f64, th: f64) -> BaseEval {
    let c = Core::new(u, v, th);
    let a = c.log_a.exp();
    let p = (-u).ln_1p().exp(); // 1 - u
    let q = (-v).ln_1p().exp();
    let (ru, rv) = c.ratios(th);
    let tm1 = th - 1.0;
    let ta = tm1 + a;
    let la_th2 = c.log_a / (th * th);
    // d log A / d theta.
    let g = ru * c.lp + rv * c.lq;

    let log_cdf = (-(c.log_a / th).exp()).ln_1p();
    // A^(1/theta) / C, needed for the parameter derivative of log C.
    let pow_over_c = (c.log_a / th - log_cdf).exp();
    // d/dtheta log(1-Q) = -Q lq / (1-Q), and the mirror for P.
    let q_term = c.lq * (th * c.lq - c.l1q).exp();
    let p_term = c.lp * (th * c.lp - c.l1p).exp();

    BaseEval {
        log_cdf,
        log_h1: (1.0 / th - 1.0) * c.log_a + tm1 * c.lp + c.l1q,
        log_h2: (1.0 / th - 1.0) * c.log_a + tm1 * c.lq + c.l1p,
        log_pdf: (1.0 / th - 2.0) * c.log_a + tm1 * (c.lp + c.lq) + ta.ln(),
        dlog_h1_du: tm1 * (ru - 1.0) / p,
        dlog_h2_dv: tm1 * (rv - 1.0) / q,
        dlog_pdf_du: ((2.0 * th - 1.0) * ru - tm1 - th * ru * a / ta) / p,
        dlog_pdf_dv: ((2.0 * th - 1.0) * rv - tm1 - th * rv * a / ta) / q,
        dlog_cdf_dth: -pow_over_c * (-la_th2 + g / th),
        dlog_h1_dth: -la_th2 + (1.0 / th - 1.0) * g + c.lp - q_term,
        dlog_h2_dth: -la_th2 + (1.0 / th - 1.0) * g + c.lq - p_term,
        dlog_pdf_dth: -la_th2 + (1.0 / th - 2.0) * g + c.lp + c.lq + (1.0 + g * a) / ta,
    }
}

/// Kendall's tau: 1 + (4/theta^2) * int_0^1 x log(x) (1-x)^(2(1-theta)/theta) dx.
/// Substituting x = 1 - s^(theta/2) turns the endpoint singularity into a
/// smooth integrand: tau = 1 + (2/theta) * int_0^1 phi(s^(theta/2)) ds with
/// phi(t) = (1-t) log(1-t) / t.
pub fn kendall_tau(th: f64) -> f64 {
    let phi = |t: f64| {
        if t < 1e-10 {
            -1.0 + 0.5 * t
        } else if t > 1.0 - 1e-15 {
            0.0
        } else {
            (1.0 - t) * (-t).ln_1p() / t
        }
    };
    let integrand = |s: f64| phi(s.powf(th / 2.0));
    1.0 + 2.0 / th * adaptive_simpson(&integrand, 0.0, 1.0, 1e-10, 48)
}
