use super::*;
use crate::copulas::{CopulaFamily, CopulaKind, Rotation};
use crate::simulate::{generate, CensoringRegime, DgpScenario, ScenarioKind};

fn gumbel() -> Dependence {
    Dependence::Copula(CopulaFamily { kind: CopulaKind::Gumbel, rotation: Rotation::None })
}

fn alternating_weights(n: usize) -> Vec<u8> {
    (0..n).map(|i| (i % 2 == 0) as u8).collect()
}

fn spec_linear(p: usize, dep: Dependence, mode: EstimationMode) -> ModelSpec {
    ModelSpec {
        margin1: crate::margins::MarginFamily::Weibull,
        margin2: crate::margins::MarginFamily::LogLogistic,
        dependence: dep,
        mode,
        formulas: std::array::from_fn(|_| Formula::all_linear(p)),
        pspline: Default::default(),
    }
}

fn config(n: usize, budgets: (usize, usize, usize)) -> BoostConfig {
    BoostConfig {
        step_length: 0.1,
        mstop_margin1: budgets.0,
        mstop_margin2: budgets.1,
        mstop_dependence: budgets.2,
        stabilization: Stabilization::L2,
        oob_weights: alternating_weights(n),
        seed: 1,
    }
}

#[test]
fn stabilize_l2_properties() {
    let n = 64;
    // Norm already sqrt(n): unchanged.
    let mut g = vec![1.0; n];
    let orig = g.clone();
    stabilize(&mut g, Stabilization::L2);
    assert_eq!(g, orig);
    // Scale invariance: 2g maps to the same output as g.
    let mut a: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.3).collect();
    let mut b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
    stabilize(&mut a, Stabilization::L2);
    stabilize(&mut b, Stabilization::L2);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
    // Output norm is sqrt(n).
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - (n as f64).sqrt()).abs() < 1e-10);
    // Zero vector unchanged.
    let mut z = vec![0.0; 8];
    stabilize(&mut z, Stabilization::L2);
    assert_eq!(z, vec![0.0; 8]);
}

#[test]
fn stabilize_mad() {
    let mut g = vec![1.0, 2.0, 3.0, 4.0, 100.0];
    stabilize(&mut g, Stabilization::Mad);
    // median = 3, |dev| = [2,1,0,1,97], mad = 1.
    assert!((g[0] - 1.0).abs() < 1e-12);
    assert!((g[4] - 100.0).abs() < 1e-12);
}

#[test]
fn select_mstop_rules() {
    // Strictly decreasing: the last index.
    let curve: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
    assert_eq!(select_mstop(&curve), 9);
    // V-shape with minimum at 42.
    let curve: Vec<f64> = (0..100).map(|i| ((i as f64) - 42.0).abs()).collect();
    assert_eq!(select_mstop(&curve), 42);
    // Plateau minimum: first index of the plateau.
    let curve = vec![3.0, 2.0, 1.0, 1.0, 1.0, 2.0];
    assert_eq!(select_mstop(&curve), 2);
}

#[test]
fn offsets_match_dense_grid_oracle() {
    use rand::prelude::*;
    let mut rng = StdRng::seed_from_u64(77);
    let n = 4000;
    // Exponential data: Weibull margin with shape 1, scale 2.
    let times: Vec<f64> = (0..n).map(|_| -2.0 * (1.0 - rng.random::<f64>()).ln().max(f64::MIN_POSITIVE.ln())).collect();
    let times: Vec<f64> = times.into_iter().map(|t| t.max(1e-12)).collect();
    let data = BivariateSurvDataset::new(
        times.clone(),
        vec![1; n],
        times.clone(),
        vec![1; n],
        vec![],
        vec![],
        false,
    )
    .unwrap();
    let rows: Vec<usize> = (0..n).collect();
    let (e1, e2) =
        margin_offset(&data, crate::margins::MarginFamily::Weibull, &rows, true).unwrap();

    // Dense-grid likelihood maximization oracle, coarse then refined.
    let nll = |a: f64, b: f64| -> f64 {
        let mut s = 0.0;
        for &t in &times {
            s -= likelihood::loglik_univariate(t, 1, crate::margins::MarginFamily::Weibull, a, b);
        }
        s / n as f64
    };
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..80 {
        for j in 0..80 {
            let a = -1.0 + 3.0 * i as f64 / 79.0;
            let b = -1.5 + 3.0 * j as f64 / 79.0;
            let v = nll(a, b);
            if v < best.2 {
                best = (a, b, v);
            }
        }
    }
    for _ in 0..3 {
        let (ca, cb, _) = best;
        for i in 0..40 {
            for j in 0..40 {
                let a = ca - 0.1 + 0.2 * i as f64 / 39.0;
                let b = cb - 0.1 + 0.2 * j as f64 / 39.0;
                let v = nll(a, b);
                if v < best.2 {
                    best = (a, b, v);
                }
            }
        }
    }
    assert!((e1 - best.0).abs() < 1e-2, "eta1 {e1} vs oracle {}", best.0);
    assert!((e2 - best.1).abs() < 1e-2, "eta2 {e2} vs oracle {}", best.1);
    assert!(nll(e1, e2) <= best.2 + 1e-6, "optimizer should beat the grid");
    // Near-exponential data puts the scale offset at log(mean).
    let mean = times.iter().sum::<f64>() / n as f64;
    assert!((e1 - mean.ln()).abs() < 0.05);
}

#[test]
fn lognormal_offset_is_log_mean() {
    use rand::prelude::*;
    let mut rng = StdRng::seed_from_u64(5);
    let n = 2000;
    let times: Vec<f64> = (0..n)
        .map(|_| (0.4 + 0.8 * crate::num::norm_quantile(rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12))).exp())
        .collect();
    let data = BivariateSurvDataset::new(
        times.clone(),
        vec![1; n],
        times.clone(),
        vec![1; n],
        vec![],
        vec![],
        false,
    )
    .unwrap();
    let rows: Vec<usize> = (0..n).collect();
    let (e1, _) =
        margin_offset(&data, crate::margins::MarginFamily::LogNormal, &rows, true).unwrap();
    let mean_log = times.iter().map(|t| t.ln()).sum::<f64>() / n as f64;
    assert!((e1 - mean_log).abs() < 1e-3, "{e1} vs {mean_log}");
}

#[test]
fn zero_budget_predictions_equal_offsets() {
    let s = DgpScenario {
        kind: ScenarioKind::BteLinear(CensoringRegime::Mild),
        n: 300,
        p: 4,
        rho: 0.5,
        seed: 2,
    };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, gumbel(), EstimationMode::Bte);
    let cfg = config(300, (0, 0, 0));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    let surface = predict_surface(&model, &out.dataset).unwrap();
    for k in 0..N_PARAMS {
        for i in 0..300 {
            assert_eq!(surface.eta[k][i], model.params[k].offset);
        }
        assert!(model.params[k].coef.is_empty());
    }
}

#[test]
fn single_iteration_updates_one_learner() {
    let s = DgpScenario {
        kind: ScenarioKind::BteLinear(CensoringRegime::Mild),
        n: 200,
        p: 4,
        rho: 0.5,
        seed: 3,
    };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, Dependence::Independence, EstimationMode::Bte);
    let mut cfg = config(200, (1, 0, 0));
    cfg.step_length = 0.1;
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    let stage = &model.stages[0];
    assert_eq!(stage.history.len(), 1);
    let entry = &stage.history[0];
    // The accumulated coefficient is step * fitted coefficient.
    if stage.mstop_opt == 1 {
        let pf = &model.params[entry.param.index()];
        assert_eq!(pf.coef.len(), 1);
        let (id, acc) = &pf.coef[0];
        assert_eq!(*id, entry.learner_id);
        match (acc, &entry.coef) {
            (Coefficients::Constant(a), Coefficients::Constant(c)) => {
                assert!((a - 0.1 * c).abs() < 1e-15)
            }
            (Coefficients::Slope(a), Coefficients::Slope(b)) => {
                assert!((a - 0.1 * b).abs() < 1e-15)
            }
            _ => panic!("unexpected coefficient kinds"),
        }
    }
}

#[test]
fn training_risk_is_monotone_on_linear_dgp() {
    let s = DgpScenario {
        kind: ScenarioKind::BteLinear(CensoringRegime::Mild),
        n: 1000,
        p: 6,
        rho: 0.5,
        seed: 4,
    };
    let out = generate(&s).unwrap();
    let spec = spec_linear(6, Dependence::Independence, EstimationMode::Bte);
    let cfg = config(1000, (500, 500, 0));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    for stage in &model.stages {
        let risks: Vec<f64> = stage.history.iter().map(|h| h.train_risk).collect();
        for w in risks.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "risk increased: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn fit_is_deterministic() {
    let s = DgpScenario { kind: ScenarioKind::Scr, n: 400, p: 5, rho: 0.5, seed: 6 };
    let out = generate(&s).unwrap();
    let spec = spec_linear(5, gumbel(), EstimationMode::Bte);
    let cfg = config(400, (60, 60, 30));
    let a = fit(&out.dataset, &spec, &cfg).unwrap().to_json().unwrap();
    let b = fit(&out.dataset, &spec, &cfg).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn sparsity_matches_truncated_history() {
    let s = DgpScenario { kind: ScenarioKind::Scr, n: 600, p: 8, rho: 0.5, seed: 8 };
    let out = generate(&s).unwrap();
    let spec = spec_linear(8, gumbel(), EstimationMode::Bte);
    let cfg = config(600, (150, 150, 60));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    for (k, stage_params) in [(0usize, 0usize), (2, 1)] {
        let stage = &model.stages[stage_params];
        // Learners selected before mstop for this parameter.
        let mut seen: Vec<usize> = stage
            .history
            .iter()
            .take(stage.mstop_opt)
            .filter(|h| h.param.index() == k)
            .map(|h| h.learner_id)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let stored: Vec<usize> = model.params[k].coef.iter().map(|(id, _)| *id).collect();
        assert_eq!(seen, stored, "param {k}");
    }
}

#[test]
fn bte_and_scr_agree_on_terminal_margin() {
    let s = DgpScenario { kind: ScenarioKind::Scr, n: 500, p: 5, rho: 0.5, seed: 10 };
    let out = generate(&s).unwrap();
    let cfg = config(500, (80, 80, 40));
    let bte = fit(&out.dataset, &spec_linear(5, gumbel(), EstimationMode::Bte), &cfg).unwrap();
    let scr = fit(&out.dataset, &spec_linear(5, gumbel(), EstimationMode::Scr), &cfg).unwrap();
    // Margin-2 stage: stage index 1 under BTE, 0 under SCR.
    let b = serde_json::to_string(&bte.stages[1]).unwrap();
    let s2 = serde_json::to_string(&scr.stages[0]).unwrap();
    assert_eq!(b, s2);
    assert_eq!(
        serde_json::to_string(&bte.params[2].coef).unwrap(),
        serde_json::to_string(&scr.params[2].coef).unwrap()
    );
}

#[test]
fn independence_data_yields_near_zero_dependence() {
    use crate::simulate::{CustomScenario, LinearPredictor};
    let custom = CustomScenario {
        margin1: crate::margins::MarginFamily::Weibull,
        margin2: crate::margins::MarginFamily::LogLogistic,
        dependence: Dependence::Independence,
        predictors: [
            LinearPredictor { intercept: 0.3, coefs: vec![(0, -1.0)] },
            LinearPredictor::constant(0.1),
            LinearPredictor { intercept: 0.2, coefs: vec![(1, 0.8)] },
            LinearPredictor::constant(0.0),
            LinearPredictor::constant(0.0),
        ],
        censor_upper: [8.0, 8.0],
        scr: false,
    };
    let s = DgpScenario {
        kind: ScenarioKind::Custom(custom),
        n: 1200,
        p: 4,
        rho: 0.0,
        seed: 11,
    };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, gumbel(), EstimationMode::Bte);
    let cfg = config(1200, (150, 150, 80));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    // Fitted dependence should map close to the independence point.
    let fam = CopulaFamily { kind: CopulaKind::Gumbel, rotation: Rotation::None };
    let eta_c = model.params[4].offset
        + model.params[4]
            .coef
            .iter()
            .map(|(_, c)| match c {
                Coefficients::Constant(v) => *v,
                _ => 0.0,
            })
            .sum::<f64>();
    let tau = fam.kendall_tau(fam.response(eta_c)).unwrap();
    assert!(tau < 0.05, "tau {tau}");
}

#[test]
fn scr_mode_requires_scr_data() {
    let s = DgpScenario {
        kind: ScenarioKind::BteLinear(CensoringRegime::Mild),
        n: 100,
        p: 4,
        rho: 0.5,
        seed: 12,
    };
    let out = generate(&s).unwrap();
    assert!(!out.dataset.scr);
    let spec = spec_linear(4, gumbel(), EstimationMode::Scr);
    let cfg = config(100, (10, 10, 10));
    assert!(fit(&out.dataset, &spec, &cfg).is_err());
}

#[test]
fn config_validation() {
    assert!(BoostConfig {
        step_length: 1.0,
        mstop_margin1: 1,
        mstop_margin2: 1,
        mstop_dependence: 1,
        stabilization: Stabilization::None,
        oob_weights: vec![1, 0],
        seed: 0,
    }
    .validate(2)
    .is_err());
    assert!(BoostConfig {
        step_length: 0.1,
        mstop_margin1: 1,
        mstop_margin2: 1,
        mstop_dependence: 1,
        stabilization: Stabilization::None,
        oob_weights: vec![1, 1],
        seed: 0,
    }
    .validate(2)
    .is_err());
}

#[test]
fn predict_independence_joint_is_product() {
    let s = DgpScenario {
        kind: ScenarioKind::BteLinear(CensoringRegime::Mild),
        n: 150,
        p: 4,
        rho: 0.5,
        seed: 13,
    };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, Dependence::Independence, EstimationMode::Bte);
    let cfg = config(150, (40, 40, 0));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    let pred = predict(&model, &out.dataset, &[0.5, 1.0, 2.0]).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            for i in 0..150 {
                let want = pred.surv1[a][i] * pred.surv2[b][i];
                assert!((pred.joint[a][b][i] - want).abs() < 1e-12);
            }
        }
    }
    assert!(pred.kendall_tau.iter().all(|&t| t == 0.0));
    assert!(pred.cross_ratio.iter().all(|&r| r == 1.0));
}

#[test]
fn predict_tau_matches_recomputation() {
    let s = DgpScenario { kind: ScenarioKind::Scr, n: 200, p: 4, rho: 0.5, seed: 14 };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, gumbel(), EstimationMode::Bte);
    let cfg = config(200, (40, 40, 20));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    let pred = predict(&model, &out.dataset, &[1.0]).unwrap();
    let fam = CopulaFamily { kind: CopulaKind::Gumbel, rotation: Rotation::None };
    for i in (0..200).step_by(17) {
        let recomputed = fam.kendall_tau(pred.theta[4][i]).unwrap();
        assert_eq!(pred.kendall_tau[i], recomputed);
    }
}

#[test]
fn model_json_roundtrip() {
    let s = DgpScenario { kind: ScenarioKind::Scr, n: 120, p: 4, rho: 0.5, seed: 15 };
    let out = generate(&s).unwrap();
    let spec = spec_linear(4, gumbel(), EstimationMode::Scr);
    let cfg = config(120, (20, 20, 20));
    let model = fit(&out.dataset, &spec, &cfg).unwrap();
    let json = model.to_json().unwrap();
    let back = FittedModel::from_json(&json).unwrap();
    assert_eq!(json, back.to_json().unwrap());
    // Predictions survive the roundtrip bit for bit.
    let a = predict_surface(&model, &out.dataset).unwrap();
    let b = predict_surface(&back, &out.dataset).unwrap();
    for k in 0..N_PARAMS {
        assert_eq!(a.eta[k], b.eta[k]);
    }
}
