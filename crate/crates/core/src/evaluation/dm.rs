use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    /// Mean of `loss_a - loss_b`; negative favors `a`.
    pub mean_difference: f64,
    /// Small-sample corrected statistic.
    pub statistic: f64,
    /// Two-sided p-value from Student-t with `n - 1` degrees of freedom.
    pub p_value: f64,
}

/// Diebold-Mariano test of equal expected loss with the
/// Harvey-Leybourne-Newbold correction.
pub fn dm_test(loss_a: &[f64], loss_b: &[f64], horizon: usize) -> Result<DmResult> {
    let n = loss_a.len();
    if n != loss_b.len() {
        return Err(Error::Dimension(format!("loss lengths {} and {}", n, loss_b.len())));
    }
    if n < 10 {
        return Err(Error::TooFewObservations { needed: 10, got: n });
    }
    if horizon == 0 || horizon >= n {
        return Err(Error::InvalidParameter(format!("horizon {horizon} out of range")));
    }
    let d: Vec<f64> = loss_a.iter().zip(loss_b).map(|(a, b)| a - b).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite loss".into()));
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let autocov = |k: usize| -> f64 { (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / nf };
    let lrv = autocov(0) + 2.0 * (1..horizon).map(autocov).sum::<f64>();
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(lrv > (f64::EPSILON * scale).powi(2)) {
        return Err(Error::Degenerate("loss differential has zero variance".into()));
    }
    let h = horizon as f64;
    let hln = ((nf + 1.0 - 2.0 * h + h * (h - 1.0) / nf) / nf).sqrt();
    let statistic = hln * mean / (lrv / nf).sqrt();
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("valid t distribution");
    let p_value = 2.0 * (1.0 - dist.cdf(statistic.abs()));
    Ok(DmResult {
        mean_difference: mean,
        statistic,
        p_value,
    })
}
