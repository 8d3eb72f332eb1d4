//! Bayesian vector autoregressions for daily return panels.
//!
//! The crate is organised bottom-up:
//!
//! - [`market_data`]: price ingestion, calendar alignment of exogenous
//!   predictors, percent log returns and descriptive statistics.
//! - [`kernels`]: seeded random streams, Cholesky factorization, multivariate
//!   normal / inverse-Wishart / Gamma draws and the forward-filter
//!   backward-sampler for random-walk log-variances.
//! - [`bvar`]: Gibbs and Metropolis-within-Gibbs samplers for VAR and VARX
//!   models with constant, stochastic (Gaussian or Student-t) and CCC-GARCH
//!   innovations, univariate AR benchmarks, and a BIC lag scan.
//! - [`forecast`]: rolling-window re-estimation, one-step-ahead predictive
//!   simulation and the resumable draw-file store.
//! - [`evaluation`]: coverage, success rate, RMSE, log score, CRPS, the
//!   Diebold-Mariano test and the model confidence set.

pub mod bvar;
pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod kernels;
pub mod market_data;

pub use error::{Error, Result};
