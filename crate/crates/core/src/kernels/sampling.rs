use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::linalg::{cholesky_lower, solve_lower, solve_lower_transpose, spd_inverse};
use crate::error::{Error, Result};

pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// `mean + L z` with `L` the Cholesky factor of `covariance`.
pub fn sample_mvn<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &DVector<f64>,
    covariance: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    if covariance.nrows() != mean.len() {
        return Err(Error::Dimension(format!(
            "mean has length {}, covariance is {}x{}",
            mean.len(),
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    let l = cholesky_lower(covariance)?;
    let z = standard_normal_vector(rng, mean.len());
    Ok(mean + l * z)
}

/// Draws from `N(P^{-1} b, P^{-1})` given precision `P` and `b`, returning
/// `(draw, mean)`.
pub fn sample_mvn_from_precision<R: Rng + ?Sized>(
    rng: &mut R,
    precision: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let l = cholesky_lower(precision)?;
    let mean = solve_lower_transpose(&l, &solve_lower(&l, b));
    let z = standard_normal_vector(rng, b.len());
    let draw = &mean + solve_lower_transpose(&l, &z);
    Ok((draw, mean))
}

pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma requires shape > 0 and rate > 0, got shape {shape}, rate {rate}"
        )));
    }
    let g = Gamma::new(shape, 1.0 / rate).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(g.sample(rng))
}

pub fn sample_chi_squared<R: Rng + ?Sized>(rng: &mut R, dof: f64) -> Result<f64> {
    sample_gamma(rng, 0.5 * dof, 0.5)
}

/// Inverse-Wishart draw with mean `scale / (dof - dim - 1)`, via the Bartlett
/// decomposition of the matching Wishart on `scale^{-1}`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    rng: &mut R,
    scale: &DMatrix<f64>,
    dof: f64,
) -> Result<DMatrix<f64>> {
    let dim = scale.nrows();
    if !(dof > dim as f64 - 1.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse-Wishart needs dof > dim - 1 = {}, got {dof}",
            dim as f64 - 1.0
        )));
    }
    let precision_scale = spd_inverse(scale)?;
    let l = cholesky_lower(&precision_scale)?;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        a[(i, i)] = sample_chi_squared(rng, dof - i as f64)?.sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    let wishart = &la * la.transpose();
    spd_inverse(&wishart)
}
