use nalgebra::DMatrix;
use rand::Rng;

use super::design::Design;
use super::draws::{checked_inverse, PosteriorDrawSet, VolatilityDraws};
use super::gls::{draw_coefficients, residuals, ErrorPrecision};
use super::prior::PriorMoments;
use super::spec::ModelSpec;
use crate::error::Result;
use crate::kernels::sample_inverse_wishart;

/// Gibbs sampler for a VAR with constant innovation covariance.
///
/// Alternates `beta | Sigma` (Gaussian) and `Sigma | beta` (inverse-Wishart
/// with prior scale `I_N` and `N + 2` degrees of freedom).
pub fn sample_bvar_const<R: Rng + ?Sized>(
    spec: &ModelSpec,
    design: &Design,
    prior: &PriorMoments,
    rng: &mut R,
) -> Result<PosteriorDrawSet> {
    spec.validate()?;
    let (t, n) = design.y.shape();
    let prior_scale = DMatrix::<f64>::identity(n, n);
    let prior_dof = n as f64 + 2.0;

    let mut sigma = sample_covariance(&design.y);
    let mut beta_draws = Vec::with_capacity(spec.retained());
    let mut sigma_draws = Vec::with_capacity(spec.retained());

    for iter in 0..spec.n_iter {
        let sigma_inv = checked_inverse(&sigma)?;
        let (beta, _) = draw_coefficients(rng, design, prior, &ErrorPrecision::Constant(&sigma_inv))?;
        let e = residuals(design, &beta);
        let scale = &prior_scale + e.transpose() * &e;
        sigma = sample_inverse_wishart(rng, &scale, prior_dof + t as f64)?;
        if iter >= spec.n_burn {
            beta_draws.push(beta);
            sigma_draws.push(sigma.clone());
        }
    }

    Ok(PosteriorDrawSet {
        spec: spec.clone(),
        n_series: n,
        n_exog: design.n_exog,
        beta: beta_draws,
        volatility: VolatilityDraws::Constant { sigma: sigma_draws },
        diagnostics: Vec::new(),
    })
}

pub(crate) fn sample_covariance(y: &DMatrix<f64>) -> DMatrix<f64> {
    let (t, n) = y.shape();
    let mean = y.row_mean();
    let mut c = DMatrix::zeros(n, n);
    for r in 0..t {
        let d = y.row(r) - &mean;
        c += d.transpose() * d;
    }
    c /= (t.max(2) - 1) as f64;
    // keep the starting value well conditioned
    for i in 0..n {
        c[(i, i)] = c[(i, i)].max(1e-8) * (1.0 + 1e-6);
    }
    c
}
