//! Forward-filter backward-sampler for random-walk log-variances.
//!
//! Observation: `y*_t = h_t + m_{s_t} + e_t`, `e_t ~ N(0, v_{s_t})`, where
//! `y*_t = ln(resid_t^2 + c)` and `s_t` indexes the mixture component.
//! State: `h_1 ~ N(prior)`, `h_t = h_{t-1} + d_t + u_t`, `u_t ~ N(0, q)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mixture::MixtureTable;
use crate::error::{Error, Result};

/// Added to squared residuals before taking logs.
pub const LOG_SQUARE_OFFSET: f64 = 1e-6;

pub fn log_squared(residual: f64) -> f64 {
    (residual * residual + LOG_SQUARE_OFFSET).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePrior {
    pub mean: f64,
    pub variance: f64,
}

/// Filtered moments `E[h_t | y*_1..t]` and `Var[h_t | y*_1..t]`.
#[derive(Debug, Clone)]
pub struct FilterPass {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Draws mixture indicators given the current log-variance path.
pub fn sample_indicators<R: Rng + ?Sized>(
    rng: &mut R,
    obs: &[f64],
    path: &[f64],
    mixture: &MixtureTable,
) -> Vec<usize> {
    let k = mixture.len();
    let mut weights = vec![0.0; k];
    obs.iter()
        .zip(path)
        .map(|(y, h)| {
            let resid = y - h;
            let mut max_log = f64::NEG_INFINITY;
            for j in 0..k {
                let v = mixture.variances[j];
                let d = resid - mixture.means[j];
                weights[j] = mixture.probabilities[j].ln() - 0.5 * v.ln() - 0.5 * d * d / v;
                max_log = max_log.max(weights[j]);
            }
            let mut total = 0.0;
            for w in weights.iter_mut() {
                *w = (*w - max_log).exp();
                total += *w;
            }
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    return j;
                }
            }
            k - 1
        })
        .collect()
}

fn drift_at(drift: Option<&[f64]>, t: usize) -> f64 {
    drift.map_or(0.0, |d| d[t])
}

/// Linear-Gaussian forward pass given indicators.
pub fn kalman_filter(
    obs: &[f64],
    indicators: &[usize],
    innovation_variance: f64,
    drift: Option<&[f64]>,
    mixture: &MixtureTable,
    prior: StatePrior,
) -> Result<FilterPass> {
    let n = obs.len();
    if indicators.len() != n || drift.is_some_and(|d| d.len() != n) {
        return Err(Error::Dimension("ffbs inputs have inconsistent lengths".into()));
    }
    if innovation_variance < 0.0 || prior.variance <= 0.0 {
        return Err(Error::InvalidParameter("ffbs variances must be non-negative".into()));
    }
    let mut means = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    let (mut a, mut p) = (prior.mean, prior.variance);
    for t in 0..n {
        if t > 0 {
            a = means[t - 1] + drift_at(drift, t);
            p = variances[t - 1] + innovation_variance;
        }
        let s = indicators[t];
        let v = mixture.variances[s];
        let gain = p / (p + v);
        let m = a + gain * (obs[t] - mixture.means[s] - a);
        let c = p * v / (p + v);
        if !m.is_finite() || !c.is_finite() {
            return Err(Error::Divergence(format!("non-finite filter moments at t = {t}")));
        }
        means.push(m);
        variances.push(c);
    }
    Ok(FilterPass { means, variances })
}

/// One joint draw of the log-variance path given mixture indicators.
pub fn ffbs_given_indicators<R: Rng + ?Sized>(
    rng: &mut R,
    obs: &[f64],
    indicators: &[usize],
    innovation_variance: f64,
    drift: Option<&[f64]>,
    mixture: &MixtureTable,
    prior: StatePrior,
) -> Result<Vec<f64>> {
    let filt = kalman_filter(obs, indicators, innovation_variance, drift, mixture, prior)?;
    let n = obs.len();
    let mut path = vec![0.0; n];
    if n == 0 {
        return Ok(path);
    }
    let z: f64 = StandardNormal.sample(rng);
    path[n - 1] = filt.means[n - 1] + filt.variances[n - 1].sqrt() * z;
    for t in (0..n - 1).rev() {
        let c = filt.variances[t];
        let denom = c + innovation_variance;
        let target = path[t + 1] - drift_at(drift, t + 1);
        let (mean, var) = if innovation_variance > 0.0 && denom > 0.0 {
            let g = c / denom;
            (filt.means[t] + g * (target - filt.means[t]), (c - g * c).max(0.0))
        } else {
            (target, 0.0)
        };
        let z: f64 = StandardNormal.sample(rng);
        path[t] = mean + var.sqrt() * z;
        if !path[t].is_finite() {
            return Err(Error::Divergence(format!("non-finite smoothed state at t = {t}")));
        }
    }
    Ok(path)
}

/// Gibbs update of a log-variance path: draw mixture indicators given the
/// current path, then a new path by FFBS.
#[allow(clippy::too_many_arguments)]
pub fn ffbs_log_volatility<R: Rng + ?Sized>(
    rng: &mut R,
    log_squared_residuals: &[f64],
    current_path: &[f64],
    innovation_variance: f64,
    drift: Option<&[f64]>,
    mixture: &MixtureTable,
    prior: StatePrior,
) -> Result<Vec<f64>> {
    if log_squared_residuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite log squared residual".into()));
    }
    let indicators = sample_indicators(rng, log_squared_residuals, current_path, mixture);
    ffbs_given_indicators(
        rng,
        log_squared_residuals,
        &indicators,
        innovation_variance,
        drift,
        mixture,
        prior,
    )
}
