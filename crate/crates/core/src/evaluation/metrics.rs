use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::forecast::{ForecastSet, SeriesPredictive};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Linear-interpolation quantile of sorted data (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(draws: &[f64]) -> Vec<f64> {
    let mut v = draws.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Central `level` band of the draws, e.g. the 2.5% and 97.5% quantiles for 0.95.
pub fn predictive_band(draws: &[f64], level: f64) -> (f64, f64) {
    let s = sorted(draws);
    let tail = 0.5 * (1.0 - level);
    (quantile_sorted(&s, tail), quantile_sorted(&s, 1.0 - tail))
}

/// Empirical CRPS, `mean|X - y| - 0.5 mean|X - X'|` over all ordered pairs.
pub fn crps_draws(draws: &[f64], y: f64) -> f64 {
    let s = sorted(draws);
    let m = s.len() as f64;
    let abs_dev = s.iter().map(|x| (x - y).abs()).sum::<f64>() / m;
    let pair_sum: f64 = s
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i as f64 + 1.0) - m - 1.0) * x)
        .sum();
    abs_dev - pair_sum / (m * m)
}

fn log_normal_density(y: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln() + (y - mean).powi(2) / var)
}

fn log_student_density(y: f64, mean: f64, scale2: f64, dof: f64) -> f64 {
    ln_gamma(0.5 * (dof + 1.0))
        - ln_gamma(0.5 * dof)
        - 0.5 * (dof * std::f64::consts::PI * scale2).ln()
        - 0.5 * (dof + 1.0) * (1.0 + (y - mean).powi(2) / (dof * scale2)).ln()
}

/// Log of the draw-averaged conditional predictive density at `y`.
pub fn log_predictive_density(pred: &SeriesPredictive, y: f64) -> Result<f64> {
    let m = pred.cond_mean.len();
    if m == 0 || pred.cond_var.len() != m {
        return Err(Error::Dimension("density parameters missing".into()));
    }
    let terms: Vec<f64> = (0..m)
        .map(|j| {
            let (mu, v) = (pred.cond_mean[j], pred.cond_var[j]);
            match &pred.eta {
                Some(eta) => log_student_density(y, mu, v, eta[j]),
                None => log_normal_density(y, mu, v),
            }
        })
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Degenerate(format!("predictive density at {y} is zero")));
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    Ok(max + (sum / m as f64).ln())
}

pub fn rmse_values(points: &[f64], realized: &[f64]) -> Result<f64> {
    if points.len() != realized.len() || points.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: points.len().min(realized.len()),
        });
    }
    let mse = points
        .iter()
        .zip(realized)
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / points.len() as f64;
    Ok(mse.sqrt())
}

/// Percentage of matching signs; zero realizations are left out.
pub fn success_rate_values(points: &[f64], realized: &[f64]) -> Result<f64> {
    let (hits, total) = points
        .iter()
        .zip(realized)
        .filter(|(_, y)| **y != 0.0)
        .fold((0usize, 0usize), |(h, t), (p, y)| {
            (h + usize::from(p.signum() == y.signum() && *p != 0.0), t + 1)
        });
    if total == 0 {
        return Err(Error::Degenerate("every realization is zero".into()));
    }
    Ok(100.0 * hits as f64 / total as f64)
}

fn check_origins(set: &ForecastSet) -> Result<()> {
    if set.records.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    Ok(())
}

fn per_series<F: Fn(usize) -> Result<f64>>(set: &ForecastSet, f: F) -> Result<Vec<f64>> {
    check_origins(set)?;
    (0..set.n_series()).map(f).collect()
}

pub fn rmse(set: &ForecastSet) -> Result<Vec<f64>> {
    per_series(set, |i| rmse_values(&set.points(i), &set.realized(i)))
}

pub fn success_rate(set: &ForecastSet) -> Result<Vec<f64>> {
    per_series(set, |i| success_rate_values(&set.points(i), &set.realized(i)))
}

/// Percentage of realizations strictly outside the central `level` band.
pub fn interval_violations(set: &ForecastSet, level: f64) -> Result<Vec<f64>> {
    per_series(set, |i| {
        let outside = set
            .series(i)
            .filter(|s| {
                let (lo, hi) = predictive_band(s.draws(), level);
                s.realized < lo || s.realized > hi
            })
            .count();
        Ok(100.0 * outside as f64 / set.n_origins() as f64)
    })
}

/// Time-averaged predictive log score.
pub fn log_score(set: &ForecastSet) -> Result<Vec<f64>> {
    per_series(set, |i| {
        let l = loss_values(set, i, LossKind::NegLogScore)?;
        Ok(-l.iter().sum::<f64>() / l.len() as f64)
    })
}

pub fn crps(set: &ForecastSet) -> Result<Vec<f64>> {
    per_series(set, |i| {
        let l = loss_values(set, i, LossKind::Crps)?;
        Ok(l.iter().sum::<f64>() / l.len() as f64)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    SquaredError,
    NegLogScore,
    Crps,
}

/// Per-origin losses of one model on one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSeries {
    pub model: String,
    pub series: String,
    pub kind: LossKind,
    pub values: Vec<f64>,
}

fn loss_values(set: &ForecastSet, i: usize, kind: LossKind) -> Result<Vec<f64>> {
    set.series(i)
        .map(|s| match kind {
            LossKind::SquaredError => Ok((s.point() - s.realized).powi(2)),
            LossKind::Crps => Ok(crps_draws(s.draws(), s.realized)),
            LossKind::NegLogScore => log_predictive_density(&s.predictive, s.realized).map(|v| -v),
        })
        .collect()
}

pub fn loss_series(set: &ForecastSet, series: usize, kind: LossKind) -> Result<LossSeries> {
    if series >= set.n_series() {
        return Err(Error::Dimension(format!("series index {series} out of range")));
    }
    let values = loss_values(set, series, kind)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("non-finite {kind:?} loss for {}", set.model())));
    }
    Ok(LossSeries {
        model: set.model().to_string(),
        series: set.series_names()[series].clone(),
        kind,
        values,
    })
}
