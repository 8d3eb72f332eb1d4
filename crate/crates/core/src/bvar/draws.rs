use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spec::{ModelSpec, Volatility};
use crate::error::{Error, Result};
use crate::kernels::{cholesky_lower, spd_inverse};

/// Retained MCMC output for one model fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDrawSet {
    pub spec: ModelSpec,
    pub n_series: usize,
    pub n_exog: usize,
    /// Stacked coefficients per draw (equation-major, length `N * K`).
    pub beta: Vec<DVector<f64>>,
    pub volatility: VolatilityDraws,
    /// Sampler warnings, e.g. persistently low Metropolis acceptance.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VolatilityDraws {
    Constant {
        sigma: Vec<DMatrix<f64>>,
    },
    Stochastic(StochasticDraws),
    Garch(GarchDraws),
}

/// Triangular stochastic-volatility draws; `student` is present for the t variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticDraws {
    /// Unit lower-triangular `A` per draw.
    pub a: Vec<DMatrix<f64>>,
    /// Covariance of log-variance increments per draw.
    pub phi: Vec<DMatrix<f64>>,
    /// `log lambda_T` per draw.
    pub log_lambda_last: Vec<DVector<f64>>,
    /// Posterior mean of `log lambda_t` (T x N).
    pub log_lambda_mean: DMatrix<f64>,
    /// Full `log lambda` paths per draw when requested.
    pub log_lambda_paths: Option<Vec<DMatrix<f64>>>,
    pub student: Option<StudentDraws>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentDraws {
    /// Degrees of freedom per draw.
    pub eta: Vec<f64>,
    /// Posterior mean of the latent precision scales `w_t`.
    pub scale_mean: DVector<f64>,
    /// Smallest `w_t` seen in any retained draw.
    pub scale_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchDraws {
    pub omega: Vec<DVector<f64>>,
    pub arch: Vec<DVector<f64>>,
    pub garch: Vec<DVector<f64>>,
    pub correlation: Vec<DMatrix<f64>>,
    /// Conditional variances at the last sample period per draw.
    pub h_last: Vec<DVector<f64>>,
    /// Residuals at the last sample period per draw.
    pub resid_last: Vec<DVector<f64>>,
    /// Posterior mean of `h_t` (T x N).
    pub h_mean: DMatrix<f64>,
    /// Acceptance rates after burn-in: omega, arch, garch per series, then correlation.
    pub acceptance: Vec<f64>,
}

impl PosteriorDrawSet {
    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn n_regressors(&self) -> usize {
        self.spec.lags * self.n_series + self.n_exog
    }

    pub fn scheme(&self) -> Volatility {
        self.spec.volatility
    }

    /// Elementwise posterior mean of the coefficients.
    pub fn beta_mean(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.beta[0].len());
        for b in &self.beta {
            acc += b;
        }
        acc / self.beta.len() as f64
    }

    pub fn beta_std(&self) -> DVector<f64> {
        let mean = self.beta_mean();
        let mut acc = DVector::zeros(mean.len());
        for b in &self.beta {
            acc += (b - &mean).map(|v| v * v);
        }
        (acc / (self.beta.len() as f64 - 1.0)).map(f64::sqrt)
    }

    /// Innovation covariance implied by draw `i` at the last sample period.
    pub fn terminal_covariance(&self, i: usize) -> Result<DMatrix<f64>> {
        match &self.volatility {
            VolatilityDraws::Constant { sigma } => Ok(sigma[i].clone()),
            VolatilityDraws::Stochastic(sv) => {
                reduced_form_covariance(&sv.a[i], &sv.log_lambda_last[i].map(f64::exp))
            }
            VolatilityDraws::Garch(g) => Ok(ccc_covariance(&g.h_last[i], &g.correlation[i])),
        }
    }
}

/// `A^{-1} diag(lambda) A^{-T}`.
pub fn reduced_form_covariance(a: &DMatrix<f64>, lambda: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Divergence("singular A".into()))?;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for m in 0..=j {
                s += a_inv[(i, m)] * lambda[m] * a_inv[(j, m)];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// Splits an SPD covariance into unit lower-triangular `A` and `lambda` with
/// `sigma = A^{-1} diag(lambda) A^{-T}`.
pub fn triangular_factorization(sigma: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let l = cholesky_lower(sigma)?;
    let d = l.diagonal();
    let lambda = d.map(|v| v * v);
    let mut unit = l.clone();
    for j in 0..unit.ncols() {
        let s = d[j];
        for i in 0..unit.nrows() {
            unit[(i, j)] /= s;
        }
    }
    let a = unit
        .try_inverse()
        .ok_or_else(|| Error::Divergence("singular unit factor".into()))?;
    Ok((a, lambda))
}

/// `D R D` with `D = diag(sqrt(h))`.
pub fn ccc_covariance(h: &DVector<f64>, corr: &DMatrix<f64>) -> DMatrix<f64> {
    let s = h.map(f64::sqrt);
    DMatrix::from_fn(h.len(), h.len(), |i, j| {
        if i == j {
            h[i] * corr[(i, i)]
        } else {
            s[i] * corr[(i, j)] * s[j]
        }
    })
}

pub(crate) fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_inverse(m)
}
