//! Boosted distributional copula regression for bivariate right-censored
//! time-to-event data.
//!
//! The joint survival function of two event times is built from parametric
//! accelerated-failure-time margins (Weibull, log-normal, log-logistic)
//! coupled by a one-parameter copula (Gaussian, Clayton, Gumbel, Joe, Frank,
//! with 90/180/270 degree rotations of the Archimedean families). Every
//! distribution parameter carries its own additive predictor, estimated by
//! two-stage non-cyclic component-wise gradient boosting with out-of-bag
//! early stopping, which performs data-driven variable selection as a side
//! effect.
//!
//! The crate is organised along the model layers:
//!
//! - [`margins`]: marginal survival/density/quantile functions and their
//!   predictor-scale partial derivatives,
//! - [`copulas`]: copula CDFs, densities, conditional (h-)functions,
//!   dependence measures and sampling,
//! - [`likelihood`]: the censored bivariate log-likelihood and its negative
//!   gradients,
//! - [`learners`]: intercept, component-wise linear and P-spline base
//!   learners,
//! - [`boost`]: the two-stage boosting engine, model fitting and prediction,
//! - [`simulate`]: the built-in data-generating processes,
//! - [`metrics`]: log-score, integrated Brier score, ISE/IAE, C-index and
//!   selection-rate evaluation.
//!
//! Data-parallel inner loops (gradient evaluation, risk sums, learner sweeps,
//! simulation) run on rayon when the default `parallel` feature is enabled
//! and fall back to equivalent sequential code without it. Either way results
//! are bitwise reproducible: reductions use a fixed chunking so the floating
//! point summation order never depends on thread count.

pub mod boost;
pub mod copulas;
pub mod dataset;
pub mod error;
pub mod learners;
pub mod likelihood;
pub mod margins;
pub mod metrics;
pub mod num;
pub mod par;
pub mod simulate;
pub mod spline;

pub use boost::{
    fit, predict, predict_surface, BoostConfig, Dependence, EstimationMode, FittedModel,
    ModelSpec, Stabilization,
};
pub use dataset::BivariateSurvDataset;
pub use error::{Error, Result};

/// Link-scale predictors are clamped to this magnitude before applying
/// exponential-type response functions; boosting with extreme pseudo
/// residuals can transiently produce large predictor values.
pub const ETA_CLAMP: f64 = 15.0;

/// Copula arguments are nudged into `[U_EPS, 1 - U_EPS]` before evaluating
/// log-densities and h-functions; fitted survival values can hit 0 or 1
/// numerically.
pub const U_EPS: f64 = 1e-12;
