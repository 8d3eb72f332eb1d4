use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::market_data::{PredictorPanel, ReturnPanel};

/// Stacked regression `Y = X B + E`.
///
/// Row `r` of `x` holds lag 1 of all series, then lag 2, ..., lag `p`, then
/// the exogenous predictors observed one period before the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub y: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub lags: usize,
    pub n_exog: usize,
}

impl Design {
    pub fn n_obs(&self) -> usize {
        self.y.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.y.ncols()
    }

    pub fn n_regressors(&self) -> usize {
        self.x.ncols()
    }
}

pub fn build_design(panel: &ReturnPanel, lags: usize, predictors: Option<&PredictorPanel>) -> Result<Design> {
    if let Some(w) = predictors {
        if w.dates() != panel.dates() {
            return Err(Error::Misaligned(
                "predictor dates do not match the return panel".into(),
            ));
        }
    }
    build_design_from_values(panel.values(), lags, predictors.map(|w| w.values()))
}

pub fn build_design_from_values(
    values: &DMatrix<f64>,
    lags: usize,
    exog: Option<&DMatrix<f64>>,
) -> Result<Design> {
    let (t, n) = values.shape();
    let n_exog = exog.map_or(0, |w| w.ncols());
    if let Some(w) = exog {
        if w.nrows() != t {
            return Err(Error::Misaligned(format!(
                "{} predictor rows for {} return rows",
                w.nrows(),
                t
            )));
        }
    }
    if lags == 0 {
        return Err(Error::InvalidParameter("lag order must be >= 1".into()));
    }
    let k = n * lags + n_exog;
    if t <= lags + k {
        return Err(Error::TooFewObservations {
            needed: lags + k + 1,
            got: t,
        });
    }
    let rows = t - lags;
    let y = values.rows(lags, rows).into_owned();
    let mut x = DMatrix::zeros(rows, k);
    for r in 0..rows {
        let tt = r + lags;
        for l in 0..lags {
            for j in 0..n {
                x[(r, l * n + j)] = values[(tt - 1 - l, j)];
            }
        }
        if let Some(w) = exog {
            for m in 0..n_exog {
                x[(r, n * lags + m)] = w[(tt - 1, m)];
            }
        }
    }
    Ok(Design { y, x, lags, n_exog })
}

/// Regressor row for the period after `history`, whose last `lags` rows are
/// used (most recent last). `exog_last` is the latest predictor row.
pub fn forecast_regressors(history: &DMatrix<f64>, lags: usize, exog_last: Option<&[f64]>) -> Result<DVector<f64>> {
    let (t, n) = history.shape();
    if t < lags {
        return Err(Error::MissingState(format!("need {lags} lag rows, have {t}")));
    }
    let n_exog = exog_last.map_or(0, |w| w.len());
    let mut row = DVector::zeros(n * lags + n_exog);
    for l in 0..lags {
        for j in 0..n {
            row[l * n + j] = history[(t - 1 - l, j)];
        }
    }
    if let Some(w) = exog_last {
        for (m, v) in w.iter().enumerate() {
            row[n * lags + m] = *v;
        }
    }
    Ok(row)
}
