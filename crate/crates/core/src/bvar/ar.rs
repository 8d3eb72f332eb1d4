use nalgebra::DMatrix;
use rand::Rng;

use super::constant::sample_bvar_const;
use super::design::build_design_from_values;
use super::draws::PosteriorDrawSet;
use super::prior::minnesota_moments;
use super::spec::{Family, ModelSpec, Volatility};
use crate::error::{Error, Result};

/// Bayesian AR(`lags`) on a single series: the one-equation case of the
/// constant-volatility VAR sampler.
pub fn sample_ar<R: Rng + ?Sized>(series: &[f64], lags: usize, spec: &ModelSpec, rng: &mut R) -> Result<PosteriorDrawSet> {
    if series.len() <= 2 * lags + 2 {
        return Err(Error::TooFewObservations {
            needed: 2 * lags + 3,
            got: series.len(),
        });
    }
    let mut spec = spec.clone();
    spec.family = Family::Ar;
    spec.volatility = Volatility::Constant;
    spec.lags = lags;
    let values = DMatrix::from_column_slice(series.len(), 1, series);
    let design = build_design_from_values(&values, lags, None)?;
    let prior = minnesota_moments(&spec.prior, &values, lags, None)?;
    sample_bvar_const(&spec, &design, &prior, rng)
}
