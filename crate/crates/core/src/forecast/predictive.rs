use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bvar::{
    ccc_covariance, coefficient_matrix, forecast_regressors, reduced_form_covariance, PosteriorDrawSet,
    VolatilityDraws,
};
use crate::error::{Error, Result};
use crate::kernels::{cholesky_lower, sample_gamma, sample_mvn};

/// Conditioning information at the forecast origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LastState {
    /// Most recent rows of the return panel, oldest first (at least `lags` rows).
    pub history: DMatrix<f64>,
    /// Latest predictor row for VARX models.
    pub exog_last: Option<Vec<f64>>,
}

/// One-step-ahead predictive sample for one series.
///
/// `cond_mean[j]` and `cond_var[j]` parametrize the draw-`j` conditional
/// density: normal, or Student-t with `eta[j]` degrees of freedom and squared
/// scale `cond_var[j]` when `eta` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPredictive {
    pub draws: Vec<f64>,
    pub cond_mean: Vec<f64>,
    pub cond_var: Vec<f64>,
    pub eta: Option<Vec<f64>>,
}

impl SeriesPredictive {
    fn with_capacity(m: usize, student: bool) -> Self {
        Self {
            draws: Vec::with_capacity(m),
            cond_mean: Vec::with_capacity(m),
            cond_var: Vec::with_capacity(m),
            eta: student.then(|| Vec::with_capacity(m)),
        }
    }

    pub fn point(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }
}

/// `log lambda_{T+1} = log lambda_T + nu`, `nu ~ N(0, phi)`.
pub fn propagate_log_volatility<R: Rng + ?Sized>(
    rng: &mut R,
    log_lambda_last: &DVector<f64>,
    phi: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    sample_mvn(rng, log_lambda_last, phi)
}

/// GARCH(1,1) variance for the period after the sample.
pub fn garch_next_variance(
    omega: &DVector<f64>,
    arch: &DVector<f64>,
    garch: &DVector<f64>,
    h_last: &DVector<f64>,
    resid_last: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(omega.len(), |i, _| {
        omega[i] + arch[i] * resid_last[i] * resid_last[i] + garch[i] * h_last[i]
    })
}

/// Simulates `y_{T+1}` once per retained draw and records each draw's
/// conditional mean and variance for density scoring.
pub fn one_step_predictive<R: Rng + ?Sized>(
    draws: &PosteriorDrawSet,
    state: &LastState,
    rng: &mut R,
) -> Result<Vec<SeriesPredictive>> {
    let n = draws.n_series;
    let k = draws.n_regressors();
    if state.history.ncols() != n {
        return Err(Error::MissingState(format!(
            "history has {} series, model has {n}",
            state.history.ncols()
        )));
    }
    let exog_len = state.exog_last.as_ref().map_or(0, Vec::len);
    if exog_len != draws.n_exog {
        return Err(Error::MissingState(format!(
            "model uses {} predictors, state carries {exog_len}",
            draws.n_exog
        )));
    }
    let x = forecast_regressors(&state.history, draws.spec.lags, state.exog_last.as_deref())?;
    let student = matches!(&draws.volatility, VolatilityDraws::Stochastic(sv) if sv.student.is_some());
    let m = draws.len();
    let mut out: Vec<SeriesPredictive> = (0..n).map(|_| SeriesPredictive::with_capacity(m, student)).collect();

    for (idx, beta) in draws.beta.iter().enumerate() {
        let b = coefficient_matrix(beta, k, n);
        let mean = b.transpose() * &x;
        let (cov, eta) = match &draws.volatility {
            VolatilityDraws::Constant { sigma } => (sigma[idx].clone(), None),
            VolatilityDraws::Stochastic(sv) => {
                let next = propagate_log_volatility(rng, &sv.log_lambda_last[idx], &sv.phi[idx])?;
                let cov = reduced_form_covariance(&sv.a[idx], &next.map(f64::exp))?;
                (cov, sv.student.as_ref().map(|st| st.eta[idx]))
            }
            VolatilityDraws::Garch(g) => {
                let h = garch_next_variance(
                    &g.omega[idx],
                    &g.arch[idx],
                    &g.garch[idx],
                    &g.h_last[idx],
                    &g.resid_last[idx],
                );
                (ccc_covariance(&h, &g.correlation[idx]), None)
            }
        };
        let scale = match eta {
            Some(e) => 1.0 / sample_gamma(rng, 0.5 * e, 0.5 * e)?,
            None => 1.0,
        };
        let l = cholesky_lower(&cov)?;
        let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let y = &mean + l * z * scale.sqrt();
        for i in 0..n {
            let s = &mut out[i];
            s.draws.push(y[i]);
            s.cond_mean.push(mean[i]);
            s.cond_var.push(cov[(i, i)]);
            if let (Some(v), Some(e)) = (s.eta.as_mut(), eta) {
                v.push(e);
            }
        }
    }
    Ok(out)
}
