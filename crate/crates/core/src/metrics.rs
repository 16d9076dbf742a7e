//! Evaluation metrics: log-score, IPCW-weighted integrated Brier score,
//! integrated squared/absolute error against a known truth, Harrell's
//! concordance index and variable-selection rates.
//!
//! The Brier score uses Graf-style inverse-probability-of-censoring weights
//! with a Kaplan-Meier estimate of the censoring distribution on the test
//! set; integration is trapezoidal over 100 equidistant points from 0 to the
//! 95th percentile of the observed times and normalized by the grid span.

use crate::boost::{predict_surface, FittedModel, ParamId};
use crate::dataset::BivariateSurvDataset;
use crate::error::{Error, Result};
use crate::likelihood::{loglik_bivariate, loglik_univariate};
use crate::margins::MarginFamily;
use crate::simulate::{margin_params_raw, TruthRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginReport {
    pub ibs: f64,
    pub c_index: f64,
    pub ise: Option<f64>,
    pub iae: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub parameter: String,
    pub selected: Vec<String>,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_test: usize,
    pub log_score: f64,
    pub margin1: MarginReport,
    pub margin2: MarginReport,
    pub selection: Option<Vec<SelectionReport>>,
}

/// Sum of negative bivariate log-likelihood contributions on a test set at
/// the model's predicted parameters.
pub fn log_score(model: &FittedModel, data: &BivariateSurvDataset) -> Result<f64> {
    let surface = predict_surface(model, data)?;
    let mut total = 0.0;
    for i in 0..data.n() {
        let l = loglik_bivariate(
            data.times1[i],
            data.status1[i],
            data.times2[i],
            data.status2[i],
            model.spec.margin1,
            model.spec.margin2,
            &model.spec.dependence,
            &surface.row(i),
        );
        if l.is_nan() {
            return Err(Error::NonFiniteLikelihood { index: i, context: "log-score".into() });
        }
        total -= l;
    }
    Ok(total)
}

/// Univariate censored log-score of one margin (used by the model scan).
pub fn univariate_log_score(
    family: MarginFamily,
    times: &[f64],
    status: &[u8],
    eta1: &[f64],
    eta2: &[f64],
) -> f64 {
    let mut total = 0.0;
    for i in 0..times.len() {
        total -= loglik_univariate(times[i], status[i], family, eta1[i], eta2[i]);
    }
    total
}

/// Right-continuous Kaplan-Meier step function over (time, event) data.
struct KaplanMeier {
    times: Vec<f64>,
    surv: Vec<f64>,
}

impl KaplanMeier {
    fn fit(times: &[f64], events: &[u8]) -> Self {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());
        let mut at_risk = times.len() as f64;
        let mut s = 1.0;
        let mut out_t = Vec::new();
        let mut out_s = Vec::new();
        let mut idx = 0;
        while idx < order.len() {
            let t = times[order[idx]];
            let mut d = 0.0;
            let mut removed = 0.0;
            while idx < order.len() && times[order[idx]] == t {
                if events[order[idx]] == 1 {
                    d += 1.0;
                }
                removed += 1.0;
                idx += 1;
            }
            if d > 0.0 {
                s *= 1.0 - d / at_risk;
                out_t.push(t);
                out_s.push(s);
            }
            at_risk -= removed;
        }
        KaplanMeier { times: out_t, surv: out_s }
    }

    /// S(t), right-continuous.
    fn at(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 1.0,
            k => self.surv[k - 1],
        }
    }

    /// Left limit S(t-).
    fn at_left(&self, t: f64) -> f64 {
        match self.times.partition_point(|&x| x < t) {
            0 => 1.0,
            k => self.surv[k - 1],
        }
    }
}

/// 100 equidistant points from 0 to the 95th percentile of the observed
/// times.
pub fn default_grid(times: &[f64]) -> Vec<f64> {
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q95 = sorted[((sorted.len() as f64 - 1.0) * 0.95).floor() as usize];
    (0..100).map(|k| q95 * k as f64 / 99.0).collect()
}

/// Integrated Brier score with Graf IPCW weights. `pred(i, t)` is the
/// predicted survival of observation i at time t.
pub fn ibs<F>(pred: F, times: &[f64], status: &[u8], grid: &[f64]) -> Result<f64>
where
    F: Fn(usize, f64) -> f64,
{
    let n = times.len();
    if n == 0 {
        return Err(Error::Dataset("empty test set".into()));
    }
    if status.iter().all(|&d| d == 0) {
        return Err(Error::Dataset(
            "all observations censored: censoring KM is degenerate".into(),
        ));
    }
    // Censoring distribution: event indicator flipped.
    let flipped: Vec<u8> = status.iter().map(|&d| 1 - d).collect();
    let km = KaplanMeier::fit(times, &flipped);

    let brier_at = |t: f64| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            let s_hat = pred(i, t);
            if times[i] <= t && status[i] == 1 {
                let g = km.at_left(times[i]);
                if g > 0.0 {
                    total += s_hat * s_hat / g;
                }
            } else if times[i] > t {
                let g = km.at(t);
                if g > 0.0 {
                    total += (1.0 - s_hat) * (1.0 - s_hat) / g;
                }
            }
        }
        total / n as f64
    };

    Ok(trapezoid_mean(grid, &brier_at))
}

/// Trapezoid integral over the grid normalized by its span.
fn trapezoid_mean(grid: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut prev_t = grid[0];
    let mut prev_v = f(prev_t);
    for &t in &grid[1..] {
        let v = f(t);
        total += 0.5 * (v + prev_v) * (t - prev_t);
        prev_t = t;
        prev_v = v;
    }
    let span = grid[grid.len() - 1] - grid[0];
    if span > 0.0 {
        total / span
    } else {
        prev_v
    }
}

/// Mean integrated squared and absolute error between estimated and true
/// survival curves over the grid, averaged over observations.
pub fn ise_iae<E, T>(est: E, truth: T, n: usize, grid: &[f64]) -> (f64, f64)
where
    E: Fn(usize, f64) -> f64,
    T: Fn(usize, f64) -> f64,
{
    let sq = trapezoid_mean(grid, &|t| {
        (0..n).map(|i| (est(i, t) - truth(i, t)).powi(2)).sum::<f64>() / n as f64
    });
    let ab = trapezoid_mean(grid, &|t| {
        (0..n).map(|i| (est(i, t) - truth(i, t)).abs()).sum::<f64>() / n as f64
    });
    (sq, ab)
}

/// Harrell concordance: concordant / comparable pairs, ties in the risk
/// score counted one half. A pair is comparable when the earlier time is an
/// observed event.
pub fn c_index(risk: &[f64], times: &[f64], status: &[u8]) -> Result<f64> {
    let n = times.len();
    let mut concordant = 0.0;
    let mut comparable = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if status[i] == 1 && times[i] < times[j] {
                comparable += 1.0;
                if risk[i] > risk[j] {
                    concordant += 1.0;
                } else if risk[i] == risk[j] {
                    concordant += 0.5;
                }
            }
        }
    }
    if comparable == 0.0 {
        return Err(Error::Dataset("no comparable pairs for the C-index".into()));
    }
    Ok(concordant / comparable)
}

/// Per-parameter true/false positive selection rates against the known
/// informative index sets. An empty informative set leaves the TPR
/// undefined (None); an empty noise set leaves the FPR undefined.
pub fn selection_rates(
    model: &FittedModel,
    informative: &[Vec<usize>; 5],
    p: usize,
) -> Vec<SelectionReport> {
    ParamId::ALL
        .iter()
        .map(|&param| {
            let k = param.index();
            let selected = model.selected_covariates(param);
            let info = &informative[k];
            let n_info_selected = selected.iter().filter(|c| info.contains(c)).count();
            let noise = p - info.len();
            let n_noise_selected = selected.len() - n_info_selected;
            SelectionReport {
                parameter: param.label().to_string(),
                selected: selected
                    .iter()
                    .map(|&c| model.covariate_names.get(c).cloned().unwrap_or(format!("x{}", c + 1)))
                    .collect(),
                tpr: if info.is_empty() {
                    None
                } else {
                    Some(n_info_selected as f64 / info.len() as f64)
                },
                fpr: if noise == 0 {
                    None
                } else {
                    Some(n_noise_selected as f64 / noise as f64)
                },
            }
        })
        .collect()
}

/// Full evaluation of a fitted model on a test set; truth-dependent metrics
/// (ISE/IAE, selection rates) appear when a truth record is supplied.
pub fn evaluate(
    model: &FittedModel,
    data: &BivariateSurvDataset,
    truth: Option<&TruthRecord>,
) -> Result<EvaluationReport> {
    let surface = predict_surface(model, data)?;
    let score = log_score(model, data)?;

    let margin_report = |first: bool| -> Result<MarginReport> {
        let (family, times, status, e_scale, e_shape) = if first {
            (model.spec.margin1, &data.times1, &data.status1, &surface.eta[0], &surface.eta[1])
        } else {
            (model.spec.margin2, &data.times2, &data.status2, &surface.eta[2], &surface.eta[3])
        };
        let grid = default_grid(times);
        let pred = |i: usize, t: f64| -> f64 {
            if t <= 0.0 {
                return 1.0;
            }
            let p = family.response(e_scale[i], e_shape[i]);
            family.survival(t, &p).unwrap_or(f64::NAN)
        };
        let ibs_val = ibs(pred, times, status, &grid)?;
        // Risk score: negative predicted median survival time. Any strictly
        // monotone transform gives the same C-index.
        let risk: Vec<f64> = (0..data.n())
            .map(|i| {
                let p = family.response(e_scale[i], e_shape[i]);
                -family.quantile(0.5, &p).unwrap_or(f64::INFINITY)
            })
            .collect();
        let c = c_index(&risk, times, status)?;
        let (ise_v, iae_v) = match truth {
            None => (None, None),
            Some(tr) => {
                let (t1, t2) = if first { (&tr.eta[0], &tr.eta[1]) } else { (&tr.eta[2], &tr.eta[3]) };
                let (fam_true, te1, te2) = if first {
                    (tr.margin1, t1, t2)
                } else {
                    (tr.margin2, t1, t2)
                };
                let truth_fn = |i: usize, t: f64| -> f64 {
                    if t <= 0.0 {
                        return 1.0;
                    }
                    let p = margin_params_raw(fam_true, te1[i], te2[i]);
                    fam_true.survival(t, &p).unwrap_or(f64::NAN)
                };
                let (a, b) = ise_iae(pred, truth_fn, data.n(), &grid);
                (Some(a), Some(b))
            }
        };
        Ok(MarginReport { ibs: ibs_val, c_index: c, ise: ise_v, iae: iae_v })
    };

    let selection = truth.map(|tr| selection_rates(model, &tr.informative, data.p()));

    Ok(EvaluationReport {
        n_test: data.n(),
        log_score: score,
        margin1: margin_report(true)?,
        margin2: margin_report(false)?,
        selection,
    })
}

/// Sample Kendall rank correlation via Knight's O(n log n) merge-sort
/// inversion count. Assumes (almost surely) continuous data; ties get no
/// special correction beyond being counted as neither concordant nor
/// discordant.
pub fn empirical_kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Dataset(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Dataset("need at least two pairs".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        xs[i]
            .partial_cmp(&xs[j])
            .unwrap()
            .then(ys[i].partial_cmp(&ys[j]).unwrap())
    });
    let mut y_sorted: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut y_sorted, &mut buf);
    let total = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok((total - 2.0 * discordant as f64) / total)
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (a, b) = v.split_at_mut(mid);
        merge_count(a, &mut buf[..mid]) + merge_count(b, &mut buf[mid..])
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            j += 1;
            inv += (mid - i) as u64;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = v[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = v[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    #[test]
    fn tau_perfect_and_reversed() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_kendall_tau(&xs, &xs).unwrap(), 1.0);
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(empirical_kendall_tau(&xs, &rev).unwrap(), -1.0);
    }

    #[test]
    fn tau_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 200;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<f64> = (0..n).map(|i| xs[i] + rng.random::<f64>()).collect();
        let fast = empirical_kendall_tau(&xs, &ys).unwrap();
        let mut conc = 0i64;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = (xs[i] - xs[j]) * (ys[i] - ys[j]);
                conc += if s > 0.0 { 1 } else { -1 };
            }
        }
        let brute = conc as f64 / (n as f64 * (n as f64 - 1.0) / 2.0);
        assert!((fast - brute).abs() < 1e-12);
    }

    #[test]
    fn constant_half_predictor_has_quarter_brier() {
        // Uncensored data, S-hat = 0.5 everywhere: Brier 0.25 at every grid
        // point, so the integrated score is 0.25.
        let times: Vec<f64> = (1..=50).map(|i| i as f64 / 10.0).collect();
        let status = vec![1u8; 50];
        let grid = default_grid(&times);
        let v = ibs(|_, _| 0.5, &times, &status, &grid).unwrap();
        assert!((v - 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn oracle_predictor_beats_constant() {
        // Step-function truth: event at t = 1 or t = 2 known exactly.
        let times = vec![1.0, 1.0, 2.0, 2.0, 1.0, 2.0];
        let status = vec![1u8; 6];
        let grid: Vec<f64> = (0..100).map(|k| 2.5 * k as f64 / 99.0).collect();
        let oracle = |i: usize, t: f64| -> f64 {
            if t < times[i] {
                1.0
            } else {
                0.0
            }
        };
        let a = ibs(oracle, &times, &status, &grid).unwrap();
        let b = ibs(|_, _| 0.5, &times, &status, &grid).unwrap();
        assert!(a < b, "oracle {a} vs constant {b}");
        assert!(a < 1e-12);
    }

    #[test]
    fn ibs_rejects_fully_censored() {
        let times = vec![1.0, 2.0];
        let status = vec![0u8, 0];
        let grid = vec![0.0, 1.0];
        assert!(ibs(|_, _| 0.5, &times, &status, &grid).is_err());
    }

    #[test]
    fn ise_iae_constant_offset() {
        let grid: Vec<f64> = (0..101).map(|k| k as f64 / 100.0).collect();
        let (ise_v, iae_v) = ise_iae(|_, t| 0.5 - t * 0.0 + 0.1, |_, _| 0.5, 4, &grid);
        assert!((iae_v - 0.1).abs() < 1e-12);
        assert!((ise_v - 0.01).abs() < 1e-12);
        let (z1, z2) = ise_iae(|_, t| (-t).exp(), |_, t| (-t).exp(), 3, &grid);
        assert_eq!((z1, z2), (0.0, 0.0));
    }

    #[test]
    fn ise_iae_grid_refinement_stable() {
        let coarse: Vec<f64> = (0..100).map(|k| k as f64 / 99.0).collect();
        let fine: Vec<f64> = (0..200).map(|k| k as f64 / 199.0).collect();
        let est = |_: usize, t: f64| (-1.3 * t).exp();
        let tru = |_: usize, t: f64| (-t).exp();
        let (a1, b1) = ise_iae(est, tru, 2, &coarse);
        let (a2, b2) = ise_iae(est, tru, 2, &fine);
        assert!((a1 - a2).abs() < 1e-3 && (b1 - b2).abs() < 1e-3);
    }

    #[test]
    fn c_index_extremes_and_oracle() {
        // Perfectly anti-monotone risk (higher risk = earlier event).
        let times = vec![1.0, 2.0, 3.0, 4.0];
        let status = vec![1u8; 4];
        let risk = vec![4.0, 3.0, 2.0, 1.0];
        assert_eq!(c_index(&risk, &times, &status).unwrap(), 1.0);

        // Random risk hovers at one half.
        let mut rng = StdRng::seed_from_u64(9);
        let n = 3000;
        let t: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
        let s = vec![1u8; n];
        let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let c = c_index(&r, &t, &s).unwrap();
        assert!((c - 0.5).abs() < 0.02, "{c}");

        // Small censored instance against exhaustive enumeration.
        let times = vec![2.0, 3.0, 1.0, 5.0, 4.0];
        let status = vec![1u8, 0, 1, 0, 1];
        let risk = vec![0.6, 0.2, 0.9, 0.1, 0.15];
        let mut conc = 0.0;
        let mut comp = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                if i != j && status[i] == 1 && times[i] < times[j] {
                    comp += 1.0;
                    if risk[i] > risk[j] {
                        conc += 1.0;
                    } else if risk[i] == risk[j] {
                        conc += 0.5;
                    }
                }
            }
        }
        assert_eq!(c_index(&risk, &times, &status).unwrap(), conc / comp);

        // Monotone-transform invariance.
        let transformed: Vec<f64> = risk.iter().map(|v| v.exp()).collect();
        assert_eq!(
            c_index(&risk, &times, &status).unwrap(),
            c_index(&transformed, &times, &status).unwrap()
        );
    }

    #[test]
    fn c_index_no_comparable_pairs() {
        assert!(c_index(&[1.0, 2.0], &[1.0, 2.0], &[0, 0]).is_err());
    }
}
