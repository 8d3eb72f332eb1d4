//! Posterior samplers for Bayesian VAR, VARX and univariate AR models.

mod ar;
mod bic;
mod constant;
mod design;
mod draws;
mod garch;
mod gls;
mod prior;
mod spec;
mod sv;

pub use ar::sample_ar;
pub use bic::{bic_lag_scan, residual_log_dets};
pub use constant::sample_bvar_const;
pub use design::{build_design, build_design_from_values, forecast_regressors, Design};
pub use draws::{
    ccc_covariance, reduced_form_covariance, triangular_factorization, GarchDraws, PosteriorDrawSet,
    StochasticDraws, StudentDraws, VolatilityDraws,
};
pub use garch::{garch_path, sample_bvar_garch};
pub use gls::{coefficient_matrix, draw_coefficients, residuals, ErrorPrecision};
pub use prior::{ar_residual_std, minnesota_moments, PriorMoments};
pub use spec::{Family, MinnesotaHyper, ModelSpec, Volatility};
pub use sv::{sample_bvar_sv, sample_bvar_svt, ETA_GRID};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// Builds the design and prior for a multivariate spec and runs its sampler.
///
/// `exog` is required for the VARX family and ignored otherwise.
pub fn estimate<R: Rng + ?Sized>(
    spec: &ModelSpec,
    values: &DMatrix<f64>,
    exog: Option<&DMatrix<f64>>,
    rng: &mut R,
) -> Result<PosteriorDrawSet> {
    spec.validate()?;
    let exog = match spec.family {
        Family::Varx => Some(exog.ok_or_else(|| {
            Error::InvalidParameter("VARX models need a predictor panel".into())
        })?),
        Family::Var => None,
        Family::Ar => {
            return Err(Error::InvalidParameter(
                "univariate AR models are estimated per series with sample_ar".into(),
            ))
        }
    };
    let design = build_design_from_values(values, spec.lags, exog)?;
    let prior = minnesota_moments(&spec.prior, values, spec.lags, exog)?;
    match spec.volatility {
        Volatility::Constant => sample_bvar_const(spec, &design, &prior, rng),
        Volatility::Stochastic => sample_bvar_sv(spec, &design, &prior, rng),
        Volatility::StudentSv => sample_bvar_svt(spec, &design, &prior, rng),
        Volatility::Garch => sample_bvar_garch(spec, &design, &prior, rng),
    }
}
