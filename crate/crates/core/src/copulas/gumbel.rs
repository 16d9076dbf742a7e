//! Gumbel copula: C(u,v) = exp(-((-log u)^theta + (-log v)^theta)^(1/theta)),
//! theta >= 1, link log(theta - 1). Upper-tail dependent.
//!
//! With x = -log u, S = x^theta + y^theta and m = S^(1/theta), all powers are
//! taken in the log domain (log S via logsumexp), so extreme theta cannot
//! overflow: m stays within [min(x,y), 2 max(x,y)].

use super::BaseEval;

struct Core {
    x: f64,
    y: f64,
    lx: f64,
    ly: f64,
    log_s: f64,
    lm: f64,
    m: f64,
}

impl Core {
    fn new(u: f64, v: f64, th: f64) -> Self {
        let x = -u.ln();
        let y = -v.ln();
        let lx = x.ln();
        let ly = y.ln();
        let a = th * lx;
        let b = th * ly;
        let hi = a.max(b);
        let log_s = hi + ((a - hi).exp() + (b - hi).exp()).ln();
        let lm = log_s / th;
        Core { x, y, lx, ly, log_s, lm, m: lm.exp() }
    }

    /// (x/m)^(theta-1) <= 1.
    fn px(&self, th: f64) -> f64 {
        ((th - 1.0) * (self.lx - self.lm)).exp()
    }

    fn py(&self, th: f64) -> f64 {
        ((th - 1.0) * (self.ly - self.lm)).exp()
    }

    /// d log m / d theta at fixed (u, v).
    fn dlm_dth(&self, th: f64) -> f64 {
        let a = th * self.lx;
        let b = th * self.ly;
        let ds_over_s = (a - self.log_s).exp() * self.lx + (b - self.log_s).exp() * self.ly;
        -self.log_s / (th * th) + ds_over_s / th
    }
}

pub fn cdf(u: f64, v: f64, th: f64) -> f64 {
    (-Core::new(u, v, th).m).exp()
}

pub fn h1(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    (-c.m + (th - 1.0) * (c.lx - c.lm) - u.ln()).exp()
}

pub fn log_pdf(u: f64, v: f64, th: f64) -> f64 {
    let c = Core::new(u, v, th);
    -c.m + (th - 1.0) * (c.lx + c.ly) - u.ln() - v.ln() + (1.0 - 2.0 * th) * c.lm
        + (c.m + th - 1.0).ln()
}

pub fn eval(u: f64, v: f64, th: f64) -> BaseEval {
    let c = Core::new(u, v, th);
    let lu = u.ln();
    let lv = v.ln();
    let px = c.px(th);
    let py = c.py(th);
    let tm1 = th - 1.0;
    let mt = c.m + tm1;
    let dlm = c.dlm_dth(th);
    let dm = c.m * dlm;

    BaseEval {
        log_cdf: -c.m,
        log_h1: -c.m + tm1 * (c.lx - c.lm) - lu,
        log_h2: -c.m + tm1 * (c.ly - c.lm) - lv,
        log_pdf: -c.m + tm1 * (c.lx + c.ly) - lu - lv + (1.0 - 2.0 * th) * c.lm + mt.ln(),
        dlog_h1_du: (px - tm1 / c.x + tm1 * px / c.m - 1.0) / u,
        dlog_h2_dv: (py - tm1 / c.y + tm1 * py / c.m - 1.0) / v,
        dlog_pdf_du: (px - tm1 / c.x - 1.0 + (2.0 * th - 1.0) * px / c.m - px / mt) / u,
        dlog_pdf_dv: (py - tm1 / c.y - 1.0 + (2.0 * th - 1.0) * py / c.m - py / mt) / v,
        dlog_cdf_dth: -dm,
        dlog_h1_dth: -dm + (c.lx - c.lm) - tm1 * dlm,
        dlog_h2_dth: -dm + (c.ly - c.lm) - tm1 * dlm,
        dlog_pdf_dth: -dm + (c.lx + c.ly) - 2.0 * c.lm + (1.0 - 2.0 * th) * dlm
            + (dm + 1.0) / mt,
    }
}
