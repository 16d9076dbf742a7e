//! The boosting engine: per-stage non-cyclic iteration loop, trial-risk
//! parameter selection, out-of-bag tracking and path replay.
//!
//! Determinism: gradients and learner sweeps are order-preserving parallel
//! maps; risk sums use the fixed-chunk reduction from `par`, so results do
//! not depend on the worker-thread count. The iteration loop itself is
//! sequential because every step depends on the previous state.

use super::*;
use crate::learners::{select_best, BaseLearner, LearnerFit, LearnerKind};
use crate::par;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Loss {
    UniMargin1,
    UniMargin2,
    Bivariate,
}

struct Engine<'a> {
    data: &'a BivariateSurvDataset,
    spec: &'a ModelSpec,
    config: &'a BoostConfig,
    train_rows: Vec<usize>,
    oob_rows: Vec<usize>,
    pools: [Vec<Arc<BaseLearner>>; N_PARAMS],
    offsets: [f64; N_PARAMS],
    etas: [Vec<f64>; N_PARAMS],
    accum: [Vec<Option<Coefficients>>; N_PARAMS],
}

pub(super) fn run(
    data: &BivariateSurvDataset,
    spec: &ModelSpec,
    config: &BoostConfig,
) -> Result<FittedModel> {
    let train_rows: Vec<usize> =
        (0..data.n()).filter(|&i| config.oob_weights[i] == 1).collect();
    let oob_rows: Vec<usize> = (0..data.n()).filter(|&i| config.oob_weights[i] == 0).collect();

    // Learners for the same (column, kind) pair are shared across pools;
    // P-spline construction (basis + ridge calibration) is the costly part.
    let mut cache: BTreeMap<(usize, bool), Arc<BaseLearner>> = BTreeMap::new();
    let n = data.n();
    let mut pools: [Vec<Arc<BaseLearner>>; N_PARAMS] =
        std::array::from_fn(|_| Vec::new());
    for k in 0..N_PARAMS {
        let formula = &spec.formulas[k];
        let mut pool = vec![Arc::new(BaseLearner::intercept(train_rows.len()))];
        for &col in &formula.covariates {
            let key = (col, formula.learner == LearnerChoice::PSpline);
            let learner = cache
                .entry(key)
                .or_insert_with(|| {
                    let x_all = data.centered_column(col);
                    Arc::new(match formula.learner {
                        LearnerChoice::Linear => BaseLearner::linear(col, x_all, &train_rows),
                        LearnerChoice::PSpline => {
                            BaseLearner::pspline(col, x_all, &train_rows, spec.pspline)
                        }
                    })
                })
                .clone();
            pool.push(learner);
        }
        pools[k] = pool;
    }

    let mut engine = Engine {
        data,
        spec,
        config,
        train_rows,
        oob_rows,
        pools,
        offsets: [0.0; N_PARAMS],
        etas: std::array::from_fn(|_| vec![0.0; n]),
        accum: std::array::from_fn(|_| Vec::new()),
    };
    for k in 0..N_PARAMS {
        engine.accum[k] = vec![None; engine.pools[k].len()];
    }

    let mut stages = Vec::new();
    match spec.mode {
        EstimationMode::Bte => {
            let (o1, o2) = margin_offset(data, spec.margin1, &engine.train_rows, true)?;
            let (o3, o4) = margin_offset(data, spec.margin2, &engine.train_rows, false)?;
            engine.set_offsets(&[(0, o1), (1, o2), (2, o3), (3, o4)]);
            stages.push(engine.boost_stage(Loss::UniMargin1, &[0, 1], config.mstop_margin1)?);
            stages.push(engine.boost_stage(Loss::UniMargin2, &[2, 3], config.mstop_margin2)?);
            if matches!(spec.dependence, Dependence::Copula(_)) {
                let oc = engine.current_dependence_offset()?;
                engine.set_offsets(&[(4, oc)]);
                let stage = engine.boost_stage(Loss::Bivariate, &[4], config.mstop_dependence)?;
                warn_if_still_decreasing(&stage);
                stages.push(stage);
            }
        }
        EstimationMode::Scr => {
            let (o3, o4) = margin_offset(data, spec.margin2, &engine.train_rows, false)?;
            engine.set_offsets(&[(2, o3), (3, o4)]);
            stages.push(engine.boost_stage(Loss::UniMargin2, &[2, 3], config.mstop_margin2)?);
            let (o1, o2) = margin_offset(data, spec.margin1, &engine.train_rows, true)?;
            engine.set_offsets(&[(0, o1), (1, o2)]);
            let mut scope = vec![0usize, 1];
            if matches!(spec.dependence, Dependence::Copula(_)) {
                let oc = engine.current_dependence_offset()?;
                engine.set_offsets(&[(4, oc)]);
                scope.push(4);
            }
            let stage = engine.boost_stage(Loss::Bivariate, &scope, config.mstop_dependence)?;
            warn_if_still_decreasing(&stage);
            stages.push(stage);
        }
    }

    engine.finish(stages)
}

/// Flat-curve diagnostic for the dependence stage: if the out-of-bag risk
/// is still strictly decreasing at the budget, mstop lands on the budget
/// and a longer run might help.
fn warn_if_still_decreasing(stage: &StageFit) {
    let r = &stage.oob_risk;
    if r.len() >= 2 && stage.mstop_opt == r.len() - 1 && r.windows(2).all(|w| w[1] < w[0]) {
        log::warn!(
            "dependence-stage out-of-bag risk is still decreasing at the budget ({} iterations); using the budget as mstop",
            r.len() - 1
        );
    }
}

impl<'a> Engine<'a> {
    fn set_offsets(&mut self, values: &[(usize, f64)]) {
        for &(k, v) in values {
            self.offsets[k] = v;
            self.etas[k].iter_mut().for_each(|e| *e = v);
        }
    }

    fn current_dependence_offset(&self) -> Result<f64> {
        let surface = ParameterSurface { eta: self.etas.clone() };
        dependence_offset(self.data, self.spec, &surface, &self.config.oob_weights)
    }

    fn eta_row(&self, i: usize) -> [f64; N_PARAMS] {
        [
            self.etas[0][i],
            self.etas[1][i],
            self.etas[2][i],
            self.etas[3][i],
            self.etas[4][i],
        ]
    }

    fn nll_row(&self, loss: Loss, i: usize, row: &[f64; N_PARAMS]) -> f64 {
        let d = self.data;
        match loss {
            Loss::UniMargin1 => -likelihood::loglik_univariate(
                d.times1[i],
                d.status1[i],
                self.spec.margin1,
                row[0],
                row[1],
            ),
            Loss::UniMargin2 => -likelihood::loglik_univariate(
                d.times2[i],
                d.status2[i],
                self.spec.margin2,
                row[2],
                row[3],
            ),
            Loss::Bivariate => -likelihood::loglik_bivariate(
                d.times1[i],
                d.status1[i],
                d.times2[i],
                d.status2[i],
                self.spec.margin1,
                self.spec.margin2,
                &self.spec.dependence,
                row,
            ),
        }
    }

    fn grads_row(&self, loss: Loss, i: usize) -> [f64; N_PARAMS] {
        let d = self.data;
        let row = self.eta_row(i);
        let mut out = [0.0; N_PARAMS];
        match loss {
            Loss::UniMargin1 => {
                let g = likelihood::grad_univariate(
                    d.times1[i],
                    d.status1[i],
                    self.spec.margin1,
                    row[0],
                    row[1],
                );
                out[0] = g[0];
                out[1] = g[1];
            }
            Loss::UniMargin2 => {
                let g = likelihood::grad_univariate(
                    d.times2[i],
                    d.status2[i],
                    self.spec.margin2,
                    row[2],
                    row[3],
                );
                out[2] = g[0];
                out[3] = g[1];
            }
            Loss::Bivariate => {
                let (_, g) = likelihood::loglik_grad_bivariate(
                    d.times1[i],
                    d.status1[i],
                    d.times2[i],
                    d.status2[i],
                    self.spec.margin1,
                    self.spec.margin2,
                    &self.spec.dependence,
                    &row,
                );
                out = g;
            }
        }
        out
    }

    /// Mean training risk, optionally with one parameter's predictor shifted
    /// by step * increment.
    fn train_risk_with(&self, loss: Loss, shift: Option<(usize, &[f64])>) -> f64 {
        let step = self.config.step_length;
        par::chunked_sum(self.train_rows.len(), |j| {
            let i = self.train_rows[j];
            let mut row = self.eta_row(i);
            if let Some((k, inc)) = shift {
                row[k] += step * inc[i];
            }
            self.nll_row(loss, i, &row)
        }) / self.train_rows.len() as f64
    }

    fn oob_risk(&self, loss: Loss) -> Result<f64> {
        let risk = par::chunked_sum(self.oob_rows.len(), |j| {
            let i = self.oob_rows[j];
            self.nll_row(loss, i, &self.eta_row(i))
        }) / self.oob_rows.len() as f64;
        if risk.is_nan() {
            for &i in &self.oob_rows {
                if self.nll_row(loss, i, &self.eta_row(i)).is_nan() {
                    return Err(Error::NonFiniteLikelihood {
                        index: i,
                        context: "out-of-bag risk".into(),
                    });
                }
            }
        }
        Ok(risk)
    }

    fn apply(&mut self, k: usize, learner_id: usize, coef: &Coefficients) {
        let inc = self.pools[k][learner_id].increment_all(coef, self.data.n());
        let step = self.config.step_length;
        for (e, d) in self.etas[k].iter_mut().zip(&inc) {
            *e += step * d;
        }
        accumulate(&mut self.accum[k][learner_id], coef, step);
    }

    fn boost_stage(&mut self, loss: Loss, scope: &[usize], budget: usize) -> Result<StageFit> {
        let n_all = self.data.n();
        let step = self.config.step_length;
        let snapshot_etas = self.etas.clone();
        let snapshot_accum = self.accum.clone();

        let mut history: Vec<HistoryEntry> = Vec::new();
        let mut oob = Vec::with_capacity(budget + 1);
        oob.push(self.oob_risk(loss)?);

        for m in 1..=budget {
            // One pass over the training rows gives every in-scope gradient.
            let grads: Vec<[f64; N_PARAMS]> =
                par::map_indexed(self.train_rows.len(), |j| {
                    self.grads_row(loss, self.train_rows[j])
                });

            // Per parameter: stabilized pseudo-residuals, RSS-best learner,
            // post-update training risk of the trial.
            let mut candidates: Vec<(usize, LearnerFit, Vec<f64>, f64)> = Vec::new();
            for &k in scope {
                let mut g: Vec<f64> = grads.iter().map(|r| r[k]).collect();
                if let Some(j) = g.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteLikelihood {
                        index: self.train_rows[j],
                        context: format!(
                            "gradient of {} at iteration {m}",
                            ParamId::from_index(k).label()
                        ),
                    });
                }
                stabilize(&mut g, self.config.stabilization);
                let pool = &self.pools[k];
                let fits: Vec<LearnerFit> =
                    par::map_indexed(pool.len(), |li| pool[li].fit(li, &g));
                let best = select_best(&fits)?;
                let fit = fits[best].clone();
                let inc = pool[best].increment_all(&fit.coef, n_all);
                let trial = self.train_risk_with(loss, Some((k, &inc)));
                candidates.push((k, fit, inc, trial));
            }

            let chosen = candidates
                .iter()
                .enumerate()
                .filter(|(_, c)| c.3.is_finite())
                .min_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).unwrap().then(a.0.cmp(&b.0)))
                .map(|(i, _)| i);
            let Some(ci) = chosen else {
                return Err(Error::Numeric(format!(
                    "no finite trial risk at iteration {m}"
                )));
            };
            let (k, fit, inc, trial) = candidates.swap_remove(ci);

            for (e, d) in self.etas[k].iter_mut().zip(&inc) {
                *e += step * d;
            }
            accumulate(&mut self.accum[k][fit.learner_id], &fit.coef, step);
            history.push(HistoryEntry {
                iteration: m,
                param: ParamId::from_index(k),
                learner_id: fit.learner_id,
                coef: fit.coef,
                train_risk: trial,
            });
            oob.push(self.oob_risk(loss)?);
        }

        // Truncate the path at the out-of-bag optimum by replaying from the
        // stage's start state; increments are recomputed with identical
        // floating point operations, so the replay is exact.
        let mstop_opt = select_mstop(&oob);
        self.etas = snapshot_etas;
        self.accum = snapshot_accum;
        for entry in &history[..mstop_opt] {
            self.apply(entry.param.index(), entry.learner_id, &entry.coef);
        }

        Ok(StageFit {
            params: scope.iter().map(|&k| ParamId::from_index(k)).collect(),
            history,
            oob_risk: oob,
            mstop_opt,
        })
    }

    fn finish(self, stages: Vec<StageFit>) -> Result<FittedModel> {
        let mut spline_knots: Vec<(usize, Vec<f64>)> = Vec::new();
        for pool in &self.pools {
            for learner in pool {
                if let (LearnerKind::PSpline { col }, Some(knots)) =
                    (learner.kind(), learner.spline_knots())
                {
                    if !spline_knots.iter().any(|(c, _)| *c == col) {
                        spline_knots.push((col, knots.to_vec()));
                    }
                }
            }
        }
        spline_knots.sort_by_key(|(c, _)| *c);

        let params: [ParamFit; N_PARAMS] = std::array::from_fn(|k| ParamFit {
            offset: self.offsets[k],
            coef: self.accum[k]
                .iter()
                .enumerate()
                .filter_map(|(id, c)| c.clone().map(|c| (id, c)))
                .collect(),
        });

        let model = FittedModel {
            spec: self.spec.clone(),
            config: self.config.clone(),
            covariate_names: self.data.covariate_names.clone(),
            col_means: self.data.col_means.clone(),
            params,
            stages,
            spline_knots,
        };

        // Consistency check: the accumulated coefficients must reproduce the
        // incrementally built predictors.
        let replayed = predict::predict_surface(&model, self.data)?;
        for k in 0..N_PARAMS {
            for i in 0..self.data.n() {
                let diff = (replayed.eta[k][i] - self.etas[k][i]).abs();
                if diff > 1e-10 * (1.0 + self.etas[k][i].abs()) {
                    return Err(Error::Numeric(format!(
                        "replay mismatch for {} at row {i}: {diff}",
                        ParamId::from_index(k).label()
                    )));
                }
            }
        }
        Ok(model)
    }
}

fn accumulate(slot: &mut Option<Coefficients>, coef: &Coefficients, step: f64) {
    match slot {
        None => {
            *slot = Some(match coef {
                Coefficients::Constant(c) => Coefficients::Constant(step * c),
                Coefficients::Slope(b) => Coefficients::Slope(step * b),
                Coefficients::Spline(v) => {
                    Coefficients::Spline(v.iter().map(|x| step * x).collect())
                }
            });
        }
        Some(acc) => match (acc, coef) {
            (Coefficients::Constant(a), Coefficients::Constant(c)) => *a += step * c,
            (Coefficients::Slope(a), Coefficients::Slope(b)) => *a += step * b,
            (Coefficients::Spline(a), Coefficients::Spline(v)) => {
                for (x, y) in a.iter_mut().zip(v) {
                    *x += step * y;
                }
            }
            _ => unreachable!("learner changed coefficient kind"),
        },
    }
}
