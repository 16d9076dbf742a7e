//! Shared numerical routines: univariate and bivariate standard normal
//! functions, quadrature, and derivative-free optimizers.

pub mod bvn;
pub mod normal;
pub mod optim;
pub mod quad;

pub use bvn::binorm_cdf;
pub use normal::{norm_cdf, norm_log_cdf, norm_log_pdf, norm_pdf, norm_quantile};
