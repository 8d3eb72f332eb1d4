use nalgebra::{DMatrix, DVector};

use super::spec::MinnesotaHyper;
use crate::error::{Error, Result};

/// Gaussian prior on the stacked coefficient vector (equation-major: the
/// `K` coefficients of equation 1, then equation 2, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMoments {
    pub mean: DVector<f64>,
    pub variance: DVector<f64>,
}

/// Residual standard deviation of a no-intercept AR(`lags`) least-squares fit.
pub fn ar_residual_std(series: &[f64], lags: usize) -> Result<f64> {
    let t = series.len();
    if t <= 2 * lags {
        return Err(Error::TooFewObservations {
            needed: 2 * lags + 1,
            got: t,
        });
    }
    let rows = t - lags;
    let x = DMatrix::from_fn(rows, lags, |r, l| series[r + lags - 1 - l]);
    let y = DVector::from_fn(rows, |r, _| series[r + lags]);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let coef = xtx
        .clone()
        .lu()
        .solve(&xty)
        .unwrap_or_else(|| DVector::zeros(lags));
    let resid = y - x * coef;
    let var = resid.norm_squared() / rows as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance("AR residuals used for prior scaling".into()));
    }
    Ok(var.sqrt())
}

fn sample_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Minnesota prior moments for `values` (T x N) with `lags` lags and optional
/// exogenous columns `exog` (T x M).
///
/// Standard deviations: own lag `l` is `overall / l^decay`; lag `l` of series
/// `j` in equation `i` is further multiplied by `cross * s_i / s_j`; predictor
/// `m` in equation `i` is `overall * exogenous * s_i / s_m`.
pub fn minnesota_moments(
    hyper: &MinnesotaHyper,
    values: &DMatrix<f64>,
    lags: usize,
    exog: Option<&DMatrix<f64>>,
) -> Result<PriorMoments> {
    hyper.validate()?;
    let n = values.ncols();
    let series_std: Vec<f64> = (0..n)
        .map(|j| {
            let col: Vec<f64> = values.column(j).iter().copied().collect();
            ar_residual_std(&col, lags)
        })
        .collect::<Result<_>>()?;
    let exog_std: Vec<f64> = match exog {
        Some(w) => (0..w.ncols())
            .map(|m| {
                let col: Vec<f64> = w.column(m).iter().copied().collect();
                let s = sample_std(&col);
                if s > 0.0 {
                    Ok(s)
                } else {
                    Err(Error::ZeroVariance(format!("predictor column {m}")))
                }
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let k = n * lags + exog_std.len();
    let mut mean = DVector::zeros(n * k);
    let mut variance = DVector::zeros(n * k);
    for i in 0..n {
        for l in 0..lags {
            let base = hyper.overall / ((l + 1) as f64).powf(hyper.decay);
            for j in 0..n {
                let idx = i * k + l * n + j;
                let sd = if i == j {
                    base
                } else {
                    base * hyper.cross * series_std[i] / series_std[j]
                };
                variance[idx] = sd * sd;
                if i == j && l == 0 {
                    mean[idx] = hyper.own_lag_mean;
                }
            }
        }
        for (m, sw) in exog_std.iter().enumerate() {
            let sd = hyper.overall * hyper.exogenous * series_std[i] / sw;
            variance[i * k + n * lags + m] = sd * sd;
        }
    }
    Ok(PriorMoments { mean, variance })
}
