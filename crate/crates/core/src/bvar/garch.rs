//! VAR with GARCH(1,1) variances and a constant conditional correlation matrix.
//!
//! `h_{it} = omega_i + b_i e_{i,t-1}^2 + g_i h_{i,t-1}`, `H_t = D_t R D_t`.
//! Priors are flat on `omega_i > 0` and on the region `b_i, g_i >= 0`,
//! `b_i + g_i < 1`, and uniform over valid correlation matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::constant::sample_covariance;
use super::design::Design;
use super::draws::{GarchDraws, PosteriorDrawSet, VolatilityDraws};
use super::gls::{draw_coefficients, residuals, ErrorPrecision};
use super::prior::PriorMoments;
use super::spec::ModelSpec;
use crate::error::{Error, Result};
use crate::kernels::{cholesky_lower, log_det_from_cholesky, spd_inverse};

const ADAPT_BATCH: usize = 50;
const TARGET_LOW: f64 = 0.25;
const TARGET_HIGH: f64 = 0.40;
const LOW_ACCEPTANCE_WARNING: f64 = 0.01;

/// Random-walk proposal scale tuned during burn-in and frozen afterwards.
#[derive(Debug, Clone)]
struct Tuner {
    scale: f64,
    batch_accepts: usize,
    batch_tries: usize,
    burn_accepts: usize,
    burn_tries: usize,
    post_accepts: usize,
    post_tries: usize,
}

impl Tuner {
    fn new(scale: f64) -> Self {
        Self {
            scale,
            batch_accepts: 0,
            batch_tries: 0,
            burn_accepts: 0,
            burn_tries: 0,
            post_accepts: 0,
            post_tries: 0,
        }
    }

    fn record(&mut self, accepted: bool, burning: bool) {
        if burning {
            self.batch_tries += 1;
            self.burn_tries += 1;
            if accepted {
                self.batch_accepts += 1;
                self.burn_accepts += 1;
            }
            if self.batch_tries == ADAPT_BATCH {
                let rate = self.batch_accepts as f64 / ADAPT_BATCH as f64;
                if rate < TARGET_LOW {
                    self.scale *= 0.7;
                } else if rate > TARGET_HIGH {
                    self.scale *= 1.4;
                }
                self.batch_accepts = 0;
                self.batch_tries = 0;
            }
        } else {
            self.post_tries += 1;
            if accepted {
                self.post_accepts += 1;
            }
        }
    }

    fn burn_rate(&self) -> Option<f64> {
        (self.burn_tries > 0).then(|| self.burn_accepts as f64 / self.burn_tries as f64)
    }

    fn post_rate(&self) -> f64 {
        if self.post_tries == 0 {
            0.0
        } else {
            self.post_accepts as f64 / self.post_tries as f64
        }
    }
}

/// Conditional variance path by the GARCH(1,1) recursion started at `h1`.
pub fn garch_path(resid: &[f64], omega: f64, arch: f64, garch: f64, h1: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(resid.len());
    h.push(h1);
    for t in 1..resid.len() {
        let prev = h[t - 1];
        h.push(omega + arch * resid[t - 1] * resid[t - 1] + garch * prev);
    }
    h
}

struct CorrState {
    inv: DMatrix<f64>,
    log_det: f64,
}

impl CorrState {
    fn new(r: &DMatrix<f64>) -> Option<Self> {
        let l = cholesky_lower(r).ok()?;
        Some(Self {
            inv: spd_inverse(r).ok()?,
            log_det: log_det_from_cholesky(&l),
        })
    }
}

/// Gaussian CCC log-likelihood up to a constant.
fn log_likelihood(e: &DMatrix<f64>, h: &DMatrix<f64>, corr: &CorrState) -> f64 {
    let (t, n) = e.shape();
    let mut ll = 0.0;
    let mut z = vec![0.0; n];
    for r in 0..t {
        let mut quad = 0.0;
        for i in 0..n {
            z[i] = e[(r, i)] / h[(r, i)].sqrt();
            ll -= 0.5 * h[(r, i)].ln();
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += corr.inv[(i, j)] * z[j];
            }
            quad += z[i] * s;
        }
        ll -= 0.5 * (corr.log_det + quad);
    }
    ll
}

fn column(m: &DMatrix<f64>, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

fn initial_variance(resid: &[f64]) -> f64 {
    (resid.iter().map(|v| v * v).sum::<f64>() / resid.len() as f64).max(1e-10)
}

fn in_region(omega: f64, arch: f64, garch: f64) -> bool {
    omega > 0.0 && arch >= 0.0 && garch >= 0.0 && arch + garch < 1.0
}

pub fn sample_bvar_garch<R: Rng + ?Sized>(
    spec: &ModelSpec,
    design: &Design,
    prior: &PriorMoments,
    rng: &mut R,
) -> Result<PosteriorDrawSet> {
    spec.validate()?;
    let (t, n) = design.y.shape();
    let retained = spec.retained();
    let start = sample_covariance(&design.y);

    let mut omega = DVector::from_fn(n, |i, _| 0.1 * start[(i, i)]);
    let mut arch = DVector::from_element(n, 0.1);
    let mut garch = DVector::from_element(n, 0.8);
    let mut corr = DMatrix::<f64>::identity(n, n);
    let mut corr_state = CorrState::new(&corr).expect("identity is a valid correlation");
    let mut h = DMatrix::from_fn(t, n, |_, i| start[(i, i)]);

    let mut omega_tuner: Vec<Tuner> = (0..n).map(|_| Tuner::new(0.2)).collect();
    let mut arch_tuner: Vec<Tuner> = (0..n).map(|_| Tuner::new(0.03)).collect();
    let mut garch_tuner: Vec<Tuner> = (0..n).map(|_| Tuner::new(0.03)).collect();
    let mut corr_tuner: Vec<Tuner> = (0..n * (n - 1) / 2).map(|_| Tuner::new(0.05)).collect();

    let mut draws = GarchDraws {
        omega: Vec::with_capacity(retained),
        arch: Vec::with_capacity(retained),
        garch: Vec::with_capacity(retained),
        correlation: Vec::with_capacity(retained),
        h_last: Vec::with_capacity(retained),
        resid_last: Vec::with_capacity(retained),
        h_mean: DMatrix::zeros(t, n),
        acceptance: Vec::new(),
    };
    let mut beta_draws = Vec::with_capacity(retained);

    for iter in 0..spec.n_iter {
        let burning = iter < spec.n_burn;

        let inv_std = h.map(|v| 1.0 / v.sqrt());
        let (beta, _) = draw_coefficients(
            rng,
            design,
            prior,
            &ErrorPrecision::Correlated {
                corr_inv: &corr_state.inv,
                inv_std: &inv_std,
            },
        )?;
        let e = residuals(design, &beta);
        let h1: Vec<f64> = (0..n).map(|i| initial_variance(&column(&e, i))).collect();
        for i in 0..n {
            let path = garch_path(&column(&e, i), omega[i], arch[i], garch[i], h1[i]);
            h.set_column(i, &DVector::from_vec(path));
        }
        let mut current_ll = log_likelihood(&e, &h, &corr_state);

        for i in 0..n {
            let resid_i = column(&e, i);
            for param in 0..3 {
                let z: f64 = StandardNormal.sample(rng);
                let (mut w, mut b, mut g) = (omega[i], arch[i], garch[i]);
                let mut log_jacobian = 0.0;
                let tuner = match param {
                    0 => {
                        let step = omega_tuner[i].scale * z;
                        w *= step.exp();
                        log_jacobian = step;
                        &mut omega_tuner[i]
                    }
                    1 => {
                        b += arch_tuner[i].scale * z;
                        &mut arch_tuner[i]
                    }
                    _ => {
                        g += garch_tuner[i].scale * z;
                        &mut garch_tuner[i]
                    }
                };
                if !in_region(w, b, g) {
                    tuner.record(false, burning);
                    continue;
                }
                let old = h.column(i).into_owned();
                h.set_column(i, &DVector::from_vec(garch_path(&resid_i, w, b, g, h1[i])));
                let proposed_ll = log_likelihood(&e, &h, &corr_state);
                let log_ratio = proposed_ll - current_ll + log_jacobian;
                let accept = log_ratio.is_finite() && rng.random::<f64>().ln() < log_ratio;
                tuner.record(accept, burning);
                if accept {
                    omega[i] = w;
                    arch[i] = b;
                    garch[i] = g;
                    current_ll = proposed_ll;
                } else {
                    h.set_column(i, &old);
                }
            }
        }

        let mut pair = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let z: f64 = StandardNormal.sample(rng);
                let proposal = corr[(i, j)] + corr_tuner[pair].scale * z;
                let mut accepted = false;
                if proposal.abs() < 1.0 {
                    let mut candidate = corr.clone();
                    candidate[(i, j)] = proposal;
                    candidate[(j, i)] = proposal;
                    if let Some(state) = CorrState::new(&candidate) {
                        let proposed_ll = log_likelihood(&e, &h, &state);
                        let log_ratio = proposed_ll - current_ll;
                        if log_ratio.is_finite() && rng.random::<f64>().ln() < log_ratio {
                            corr = candidate;
                            corr_state = state;
                            current_ll = proposed_ll;
                            accepted = true;
                        }
                    }
                }
                corr_tuner[pair].record(accepted, burning);
                pair += 1;
            }
        }

        if h.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Divergence("non-positive GARCH variance".into()));
        }

        if !burning {
            draws.omega.push(omega.clone());
            draws.arch.push(arch.clone());
            draws.garch.push(garch.clone());
            draws.correlation.push(corr.clone());
            draws.h_last.push(h.row(t - 1).transpose());
            draws.resid_last.push(e.row(t - 1).transpose());
            draws.h_mean += &h;
            beta_draws.push(beta);
        }
    }
    draws.h_mean /= retained as f64;

    let mut diagnostics = Vec::new();
    let named = omega_tuner
        .iter()
        .enumerate()
        .map(|(i, tu)| (format!("omega[{i}]"), tu))
        .chain(arch_tuner.iter().enumerate().map(|(i, tu)| (format!("arch[{i}]"), tu)))
        .chain(garch_tuner.iter().enumerate().map(|(i, tu)| (format!("garch[{i}]"), tu)))
        .chain(corr_tuner.iter().enumerate().map(|(i, tu)| (format!("corr[{i}]"), tu)));
    for (name, tuner) in named {
        if let Some(rate) = tuner.burn_rate() {
            if rate < LOW_ACCEPTANCE_WARNING {
                diagnostics.push(format!(
                    "low Metropolis acceptance for {name}: {:.2}% over burn-in",
                    100.0 * rate
                ));
            }
        }
        draws.acceptance.push(tuner.post_rate());
    }

    Ok(PosteriorDrawSet {
        spec: spec.clone(),
        n_series: n,
        n_exog: design.n_exog,
        beta: beta_draws,
        volatility: VolatilityDraws::Garch(draws),
        diagnostics,
    })
}
