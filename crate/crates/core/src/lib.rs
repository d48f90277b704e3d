//! Model-free prediction intervals.
//!
//! Three constructions share one conditional CDF estimate `F(y | x)`:
//! quantile estimation (QE), distributional conformal prediction (CP) and
//! the model-free bootstrap (MFB). Two estimators of `F` are provided, a
//! kernel smoother and a linear quantile-regression fit.

pub mod cdf_models;
pub mod cli;
pub mod conjecture;
pub mod error;
pub mod experiments;
pub mod pi_methods;
pub mod rng;
pub mod stat_kernels;

pub use error::{Error, Result};
