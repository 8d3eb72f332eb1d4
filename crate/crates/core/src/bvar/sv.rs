//! VAR with triangular stochastic volatility, optionally with Student-t errors.
//!
//! `e_t = A^{-1} Lambda_t^{1/2} u_t`, `A` unit lower triangular,
//! `log lambda_t = log lambda_{t-1} + nu_t`, `nu_t ~ N(0, Phi)`.
//! The t variant scales `u_t` by `w_t^{-1/2}` with `w_t ~ Gamma(eta/2, eta/2)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::constant::sample_covariance;
use super::design::Design;
use super::draws::{PosteriorDrawSet, StochasticDraws, StudentDraws, VolatilityDraws};
use super::gls::{draw_coefficients, residuals, ErrorPrecision};
use super::prior::PriorMoments;
use super::spec::{ModelSpec, Volatility};
use crate::error::{Error, Result};
use crate::kernels::{
    ffbs_log_volatility, log_squared, sample_gamma, sample_inverse_wishart, sample_mvn_from_precision,
    spd_inverse, MixtureTable, StatePrior,
};

/// Prior variance of each free element of `A`.
pub const A_PRIOR_VARIANCE: f64 = 10.0;
/// Prior scale multiplier for the inverse-Wishart on `Phi`.
pub const PHI_PRIOR_SCALE: f64 = 0.01;
/// Prior variance of the initial log-variance around the log sample variance.
pub const INITIAL_LOG_VARIANCE_PRIOR: f64 = 4.0;
/// Support of the degrees-of-freedom grid.
pub const ETA_GRID: std::ops::RangeInclusive<u32> = 3..=40;

pub fn sample_bvar_sv<R: Rng + ?Sized>(
    spec: &ModelSpec,
    design: &Design,
    prior: &PriorMoments,
    rng: &mut R,
) -> Result<PosteriorDrawSet> {
    sample_triangular_sv(spec, design, prior, rng, false)
}

pub fn sample_bvar_svt<R: Rng + ?Sized>(
    spec: &ModelSpec,
    design: &Design,
    prior: &PriorMoments,
    rng: &mut R,
) -> Result<PosteriorDrawSet> {
    sample_triangular_sv(spec, design, prior, rng, true)
}

fn sample_triangular_sv<R: Rng + ?Sized>(
    spec: &ModelSpec,
    design: &Design,
    prior: &PriorMoments,
    rng: &mut R,
    student: bool,
) -> Result<PosteriorDrawSet> {
    spec.validate()?;
    let (t, n) = design.y.shape();
    let mixture = MixtureTable::ten_component();
    let retained = spec.retained();

    let start_cov = sample_covariance(&design.y);
    let state_priors: Vec<StatePrior> = (0..n)
        .map(|m| StatePrior {
            mean: start_cov[(m, m)].ln(),
            variance: INITIAL_LOG_VARIANCE_PRIOR,
        })
        .collect();

    let mut a = DMatrix::<f64>::identity(n, n);
    let mut h = DMatrix::from_fn(t, n, |_, m| state_priors[m].mean);
    let phi_prior = DMatrix::<f64>::identity(n, n) * PHI_PRIOR_SCALE;
    let phi_prior_dof = n as f64 + 3.0;
    let mut phi = &phi_prior / 2.0;
    let mut w = DVector::<f64>::from_element(t, 1.0);
    let mut eta = 20.0f64;

    let mut beta_draws = Vec::with_capacity(retained);
    let mut a_draws = Vec::with_capacity(retained);
    let mut phi_draws = Vec::with_capacity(retained);
    let mut last_draws = Vec::with_capacity(retained);
    let mut eta_draws = Vec::with_capacity(if student { retained } else { 0 });
    let mut paths = spec.keep_paths.then(|| Vec::with_capacity(retained));
    let mut h_mean = DMatrix::<f64>::zeros(t, n);
    let mut w_mean = DVector::<f64>::zeros(t);
    let mut w_min = f64::INFINITY;

    for iter in 0..spec.n_iter {
        // (i) coefficients given volatility
        let inv_var = DMatrix::from_fn(t, n, |r, m| w[r] * (-h[(r, m)]).exp());
        let (beta, _) = draw_coefficients(
            rng,
            design,
            prior,
            &ErrorPrecision::Triangular {
                a: &a,
                inv_variances: &inv_var,
            },
        )?;
        let e = residuals(design, &beta);

        // (ii) free elements of A, row by row
        for m in 1..n {
            let mut precision = DMatrix::<f64>::identity(m, m) / A_PRIOR_VARIANCE;
            let mut rhs = DVector::<f64>::zeros(m);
            for r in 0..t {
                let weight = inv_var[(r, m)];
                let x = DVector::from_fn(m, |j, _| -e[(r, j)]);
                precision += &x * x.transpose() * weight;
                rhs += &x * (weight * e[(r, m)]);
            }
            let (coef, _) = sample_mvn_from_precision(rng, &precision, &rhs)?;
            for j in 0..m {
                a[(m, j)] = coef[j];
            }
        }
        let u = &e * a.transpose();

        // (iii) Student-t block: eta with scales integrated out, then scales
        if student {
            eta = sample_eta(rng, &u, &h)?;
            for r in 0..t {
                let q: f64 = (0..n).map(|m| u[(r, m)].powi(2) * (-h[(r, m)]).exp()).sum();
                w[r] = sample_gamma(rng, 0.5 * (eta + n as f64), 0.5 * (eta + q))?;
            }
        }

        // (iv) log-variance paths, each conditional on the others through Phi
        for m in 0..n {
            let obs: Vec<f64> = (0..t).map(|r| log_squared(u[(r, m)] * w[r].sqrt())).collect();
            let current: Vec<f64> = h.column(m).iter().copied().collect();
            let (drift, q) = conditional_increment(&phi, &h, m)?;
            let path = ffbs_log_volatility(
                rng,
                &obs,
                &current,
                q,
                drift.as_deref(),
                &mixture,
                state_priors[m],
            )?;
            for (r, v) in path.into_iter().enumerate() {
                h[(r, m)] = v;
            }
        }

        // (v) increment covariance
        let mut scale = phi_prior.clone();
        for r in 1..t {
            let d = h.row(r) - h.row(r - 1);
            scale += d.transpose() * d;
        }
        phi = sample_inverse_wishart(rng, &scale, phi_prior_dof + (t - 1) as f64)?;

        if iter >= spec.n_burn {
            beta_draws.push(beta);
            a_draws.push(a.clone());
            phi_draws.push(phi.clone());
            last_draws.push(h.row(t - 1).transpose());
            h_mean += &h;
            if let Some(p) = paths.as_mut() {
                p.push(h.clone());
            }
            if student {
                eta_draws.push(eta);
                w_mean += &w;
                w_min = w_min.min(w.min());
            }
        }
    }

    let denom = retained as f64;
    let student_draws = student.then(|| StudentDraws {
        eta: eta_draws,
        scale_mean: w_mean / denom,
        scale_min: w_min,
    });

    let mut spec = spec.clone();
    spec.volatility = if student {
        Volatility::StudentSv
    } else {
        Volatility::Stochastic
    };

    Ok(PosteriorDrawSet {
        spec,
        n_series: n,
        n_exog: design.n_exog,
        beta: beta_draws,
        volatility: VolatilityDraws::Stochastic(StochasticDraws {
            a: a_draws,
            phi: phi_draws,
            log_lambda_last: last_draws,
            log_lambda_mean: h_mean / denom,
            log_lambda_paths: paths,
            student: student_draws,
        }),
        diagnostics: Vec::new(),
    })
}

/// Drift and variance of series `m`'s log-variance increments given the
/// other series' increments.
fn conditional_increment(phi: &DMatrix<f64>, h: &DMatrix<f64>, m: usize) -> Result<(Option<Vec<f64>>, f64)> {
    let n = phi.nrows();
    if n == 1 {
        return Ok((None, phi[(0, 0)]));
    }
    let others: Vec<usize> = (0..n).filter(|&j| j != m).collect();
    let sub = DMatrix::from_fn(others.len(), others.len(), |i, j| phi[(others[i], others[j])]);
    let cross = DVector::from_fn(others.len(), |i, _| phi[(m, others[i])]);
    let coef = spd_inverse(&sub)? * &cross;
    let q = phi[(m, m)] - coef.dot(&cross);
    if !(q > 0.0) {
        return Err(Error::Divergence("non-positive conditional log-variance innovation".into()));
    }
    let t = h.nrows();
    let mut drift = vec![0.0; t];
    for (r, d) in drift.iter_mut().enumerate().skip(1) {
        *d = others
            .iter()
            .zip(coef.iter())
            .map(|(&j, c)| c * (h[(r, j)] - h[(r - 1, j)]))
            .sum();
    }
    Ok((Some(drift), q))
}

/// Draws the degrees of freedom from the grid, integrating out the latent scales.
fn sample_eta<R: Rng + ?Sized>(rng: &mut R, u: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<f64> {
    let (t, n) = u.shape();
    let nf = n as f64;
    let quad: Vec<f64> = (0..t)
        .map(|r| (0..n).map(|m| u[(r, m)].powi(2) * (-h[(r, m)]).exp()).sum())
        .collect();
    let grid: Vec<f64> = ETA_GRID.map(f64::from).collect();
    let log_post: Vec<f64> = grid
        .iter()
        .map(|&eta| {
            let constant = ln_gamma(0.5 * (eta + nf)) - ln_gamma(0.5 * eta) - 0.5 * nf * eta.ln();
            let kernel: f64 = quad.iter().map(|q| (1.0 + q / eta).ln()).sum();
            t as f64 * constant - 0.5 * (eta + nf) * kernel
        })
        .collect();
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Divergence("degrees-of-freedom posterior is not finite".into()));
    }
    let weights: Vec<f64> = log_post.iter().map(|lp| (lp - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u01 = rng.random::<f64>() * total;
    for (eta, w) in grid.iter().zip(&weights) {
        if u01 < *w {
            return Ok(*eta);
        }
        u01 -= w;
    }
    Ok(*grid.last().unwrap())
}
