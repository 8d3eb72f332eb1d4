use nalgebra::DMatrix;

use super::design::build_design_from_values;
use crate::error::{Error, Result};
use crate::kernels::{cholesky_lower, log_det_from_cholesky};

/// BIC of least-squares VAR(p) fits for `p = 1..=max_p`, all on the common
/// sample that drops the first `max_p` rows. Lower is better.
pub fn bic_lag_scan(values: &DMatrix<f64>, max_p: usize) -> Result<Vec<f64>> {
    let (t, n) = values.shape();
    if max_p == 0 {
        return Err(Error::InvalidParameter("max_p must be >= 1".into()));
    }
    if t <= max_p * n + max_p {
        return Err(Error::TooFewObservations {
            needed: max_p * n + max_p + 1,
            got: t,
        });
    }
    let full = build_design_from_values(values, max_p, None)?;
    let rows = full.n_obs() as f64;
    (1..=max_p)
        .map(|p| {
            let x = full.x.columns(0, n * p).into_owned();
            let xtx = x.transpose() * &x;
            let coef = xtx
                .lu()
                .solve(&(x.transpose() * &full.y))
                .ok_or_else(|| Error::Degenerate(format!("singular regressors at lag {p}")))?;
            let e = &full.y - &x * coef;
            let sigma = e.transpose() * &e / rows;
            let sigma = (&sigma + sigma.transpose()) * 0.5;
            let l = cholesky_lower(&sigma)?;
            let k = (n * n * p) as f64;
            Ok(rows * log_det_from_cholesky(&l) + k * rows.ln())
        })
        .collect()
}

/// Residual determinant per lag (used to check nesting).
pub fn residual_log_dets(values: &DMatrix<f64>, max_p: usize) -> Result<Vec<f64>> {
    let n = values.ncols();
    let full = build_design_from_values(values, max_p, None)?;
    let rows = full.n_obs() as f64;
    let scores = bic_lag_scan(values, max_p)?;
    Ok(scores
        .iter()
        .enumerate()
        .map(|(i, s)| (s - (n * n * (i + 1)) as f64 * rows.ln()) / rows)
        .collect())
}
