//! Linear algebra and seeded stochastic primitives shared by the samplers.

mod ffbs;
mod linalg;
mod mixture;
mod rng;
mod sampling;

pub use ffbs::{
    ffbs_given_indicators, ffbs_log_volatility, kalman_filter, log_squared, sample_indicators, FilterPass,
    StatePrior, LOG_SQUARE_OFFSET,
};
pub use linalg::{cholesky_lower, log_det_from_cholesky, solve_lower, solve_lower_transpose, spd_inverse};
pub use mixture::MixtureTable;
pub use rng::SimRng;
pub use sampling::{
    sample_chi_squared, sample_gamma, sample_inverse_wishart, sample_mvn, sample_mvn_from_precision,
    standard_normal_vector,
};
