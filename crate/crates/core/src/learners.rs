//! Component-wise base-learners fitted to pseudo-residuals: intercept,
//! single-covariate linear, and penalized B-spline.
//!
//! Every learner is fitted on the training rows by (penalized) least
//! squares and compared by residual sum of squares. Degenerate learners
//! (zero-variance column, too few distinct values, failed factorization)
//! report infinite RSS and are never selected. The P-spline ridge parameter
//! is calibrated once per covariate so the trace of the hat matrix equals
//! the configured degrees of freedom; the penalty is data-independent given
//! x, so the factorization is cached.

use crate::error::{Error, Result};
use crate::spline::{difference_penalty, SplineBasis};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

/// P-spline hyperparameters; the defaults keep the learner weak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PSplineSettings {
    pub interior_knots: usize,
    pub degree: usize,
    pub penalty_order: usize,
    pub df: f64,
}

impl Default for PSplineSettings {
    fn default() -> Self {
        PSplineSettings { interior_knots: 20, degree: 3, penalty_order: 2, df: 4.0 }
    }
}

/// Identity of a learner within a parameter's candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LearnerKind {
    Intercept,
    /// Componentwise linear on a centered covariate column.
    Linear { col: usize },
    PSpline { col: usize },
}

/// Fitted coefficients of one weak update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coefficients {
    Constant(f64),
    Slope(f64),
    Spline(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct LearnerFit {
    pub learner_id: usize,
    pub rss: f64,
    pub coef: Coefficients,
}

/// A base-learner bound to its covariate data: `x_all` covers every row of
/// the dataset (centered), while fitting only sees the `train_rows`.
pub enum BaseLearner {
    Intercept {
        n_train: usize,
    },
    Linear {
        col: usize,
        x_all: Vec<f64>,
        train_rows: Vec<usize>,
        xx_train: f64,
    },
    PSpline {
        col: usize,
        basis: SplineBasis,
        design_all: DMatrix<f64>,
        design_train: DMatrix<f64>,
        factor: Option<Cholesky<f64, Dyn>>,
        settings: PSplineSettings,
        achieved_df: f64,
        lambda: f64,
    },
}

impl BaseLearner {
    pub fn intercept(n_train: usize) -> Self {
        BaseLearner::Intercept { n_train }
    }

    pub fn linear(col: usize, x_all: Vec<f64>, train_rows: &[usize]) -> Self {
        let xx_train = train_rows.iter().map(|&i| x_all[i] * x_all[i]).sum();
        BaseLearner::Linear { col, x_all, train_rows: train_rows.to_vec(), xx_train }
    }

    pub fn pspline(
        col: usize,
        x_all: Vec<f64>,
        train_rows: &[usize],
        settings: PSplineSettings,
    ) -> Self {
        let mut distinct: Vec<f64> = train_rows.iter().map(|&i| x_all[i]).collect();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        let x_train: Vec<f64> = train_rows.iter().map(|&i| x_all[i]).collect();
        let basis = SplineBasis::from_data(&x_train, settings.interior_knots, settings.degree);
        let design_all = basis.design(&x_all);
        let design_train = basis.design(&x_train);
        let (factor, achieved_df, lambda) = if distinct.len() < 10 {
            (None, 0.0, 0.0)
        } else {
            match calibrate_ridge(&design_train, settings) {
                Some((factor, df, lambda)) => (Some(factor), df, lambda),
                None => (None, 0.0, 0.0),
            }
        };
        BaseLearner::PSpline {
            col,
            basis,
            design_all,
            design_train,
            factor,
            settings,
            achieved_df,
            lambda,
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            BaseLearner::Intercept { .. } => LearnerKind::Intercept,
            BaseLearner::Linear { col, .. } => LearnerKind::Linear { col: *col },
            BaseLearner::PSpline { col, .. } => LearnerKind::PSpline { col: *col },
        }
    }

    /// Effective degrees of freedom actually achieved by the ridge
    /// calibration (P-splines only).
    pub fn achieved_df(&self) -> Option<f64> {
        match self {
            BaseLearner::PSpline { factor: Some(_), achieved_df, .. } => Some(*achieved_df),
            _ => None,
        }
    }

    /// Calibrated ridge parameter (P-splines only).
    pub fn ridge_lambda(&self) -> Option<f64> {
        match self {
            BaseLearner::PSpline { factor: Some(_), lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    pub fn spline_knots(&self) -> Option<&[f64]> {
        match self {
            BaseLearner::PSpline { basis, .. } => Some(&basis.knots),
            _ => None,
        }
    }

    /// Least-squares fit to the pseudo-residuals over the training rows
    /// (`g` is aligned with `train_rows`).
    pub fn fit(&self, learner_id: usize, g: &[f64]) -> LearnerFit {
        match self {
            BaseLearner::Intercept { n_train } => {
                debug_assert_eq!(g.len(), *n_train);
                let mean = g.iter().sum::<f64>() / g.len() as f64;
                let rss = g.iter().map(|v| (v - mean) * (v - mean)).sum();
                LearnerFit { learner_id, rss, coef: Coefficients::Constant(mean) }
            }
            BaseLearner::Linear { x_all, train_rows, xx_train, .. } => {
                if *xx_train <= 1e-12 {
                    return LearnerFit {
                        learner_id,
                        rss: f64::INFINITY,
                        coef: Coefficients::Slope(0.0),
                    };
                }
                let xg: f64 = train_rows
                    .iter()
                    .zip(g)
                    .map(|(&i, &gi)| x_all[i] * gi)
                    .sum();
                let slope = xg / xx_train;
                let rss = train_rows
                    .iter()
                    .zip(g)
                    .map(|(&i, &gi)| {
                        let r = gi - slope * x_all[i];
                        r * r
                    })
                    .sum();
                LearnerFit { learner_id, rss, coef: Coefficients::Slope(slope) }
            }
            BaseLearner::PSpline { design_train, factor, .. } => match factor {
                None => LearnerFit {
                    learner_id,
                    rss: f64::INFINITY,
                    coef: Coefficients::Spline(vec![]),
                },
                Some(chol) => {
                    let gv = DVector::from_column_slice(g);
                    let rhs = design_train.transpose() * &gv;
                    let coef = chol.solve(&rhs);
                    let fitted = design_train * &coef;
                    let rss = (gv - fitted).norm_squared();
                    LearnerFit {
                        learner_id,
                        rss,
                        coef: Coefficients::Spline(coef.as_slice().to_vec()),
                    }
                }
            },
        }
    }

    /// Evaluate the fitted increment on every row of the dataset.
    pub fn increment_all(&self, coef: &Coefficients, n_all: usize) -> Vec<f64> {
        match (self, coef) {
            (BaseLearner::Intercept { .. }, Coefficients::Constant(c)) => vec![*c; n_all],
            (BaseLearner::Linear { x_all, .. }, Coefficients::Slope(b)) => {
                x_all.iter().map(|&x| b * x).collect()
            }
            (BaseLearner::PSpline { design_all, .. }, Coefficients::Spline(c)) => {
                if c.is_empty() {
                    return vec![0.0; n_all];
                }
                let cv = DVector::from_column_slice(c);
                (design_all * cv).as_slice().to_vec()
            }
            _ => panic!("coefficient kind does not match learner"),
        }
    }
}

/// Solve for the ridge parameter with trace(hat) = df by bisection on the
/// log scale, then return the Cholesky factor of B'B + lambda P.
fn calibrate_ridge(
    design: &DMatrix<f64>,
    settings: PSplineSettings,
) -> Option<(Cholesky<f64, Dyn>, f64, f64)> {
    let m = design.ncols();
    let gram = design.transpose() * design;
    let penalty = difference_penalty(m, settings.penalty_order);
    let df_at = |log_lambda: f64| -> Option<f64> {
        let lambda = log_lambda.exp();
        let sys = &gram + &penalty * lambda;
        let chol = sys.cholesky()?;
        let solved = chol.solve(&gram);
        Some(solved.trace())
    };
    let (mut lo, mut hi) = (-25.0, 35.0);
    let df_lo = df_at(lo)?;
    let df_hi = df_at(hi)?;
    if df_lo < settings.df || df_hi > settings.df {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let df = df_at(mid)?;
        if (df - settings.df).abs() < 1e-9 {
            break;
        }
        // df decreases in lambda.
        if df > settings.df {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let lambda = (0.5 * (lo + hi)).exp();
    let sys = &gram + &penalty * lambda;
    let chol = sys.clone().cholesky()?;
    let achieved = chol.solve(&gram).trace();
    Some((sys.cholesky()?, achieved, lambda))
}

/// Deterministic argmin over learner fits: strictly smaller RSS wins; ties
/// within 1e-12 go to the lowest learner id.
pub fn select_best(fits: &[LearnerFit]) -> Result<usize> {
    if fits.is_empty() {
        return Err(Error::Config("empty learner pool".into()));
    }
    let mut best = 0usize;
    for (i, f) in fits.iter().enumerate().skip(1) {
        let b = &fits[best];
        if f.rss < b.rss - 1e-12 {
            best = i;
        }
    }
    if fits[best].rss.is_infinite() {
        return Err(Error::Numeric("all learners degenerate (infinite RSS)".into()));
    }
    Ok(best)
}
