#![allow(dead_code)]

use bvarcast::kernels::{sample_mvn, SimRng};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

/// Simulates `y_t = sum_l B_l y_{t-l} + e_t` with `e_t ~ N(0, sigma)`.
/// `coefs[l]` is `N x N` with row `i` the equation for series `i`.
pub fn simulate_var(coefs: &[DMatrix<f64>], sigma: &DMatrix<f64>, t: usize, seed: u64) -> DMatrix<f64> {
    let n = sigma.nrows();
    let burn = 200;
    let mut rng = SimRng::new(seed);
    let zero = DVector::zeros(n);
    let mut y = DMatrix::zeros(t + burn, n);
    for r in coefs.len()..t + burn {
        let mut mean = DVector::zeros(n);
        for (l, b) in coefs.iter().enumerate() {
            mean += b * y.row(r - 1 - l).transpose();
        }
        let e = sample_mvn(&mut rng, &zero, sigma).unwrap();
        y.set_row(r, &(mean + e).transpose());
    }
    y.rows(burn, t).into_owned()
}

/// Stacked coefficient vector in the estimator's layout from per-lag matrices.
pub fn stack_truth(coefs: &[DMatrix<f64>]) -> DVector<f64> {
    let n = coefs[0].nrows();
    let p = coefs.len();
    let k = n * p;
    let mut beta = DVector::zeros(n * k);
    for i in 0..n {
        for (l, b) in coefs.iter().enumerate() {
            for j in 0..n {
                beta[i * k + l * n + j] = b[(i, j)];
            }
        }
    }
    beta
}

/// Independent series with log-variance paths `log_var` (T x N), no dynamics in the mean.
pub fn simulate_sv(log_var: &DMatrix<f64>, seed: u64) -> DMatrix<f64> {
    let mut rng = SimRng::new(seed);
    log_var.map(|h| {
        let z: f64 = StandardNormal.sample(&mut rng);
        (0.5 * h).exp() * z
    })
}

/// Univariate GARCH(1,1) draws.
pub fn simulate_garch(n_series: usize, t: usize, omega: f64, arch: f64, garch: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = SimRng::new(seed);
    let burn = 500;
    let mut out = DMatrix::zeros(t, n_series);
    for j in 0..n_series {
        let mut h = omega / (1.0 - arch - garch);
        let mut e: f64 = 0.0;
        for r in 0..t + burn {
            h = omega + arch * e * e + garch * h;
            let z: f64 = StandardNormal.sample(&mut rng);
            e = h.sqrt() * z;
            if r >= burn {
                out[(r - burn, j)] = e;
            }
        }
    }
    out
}

/// Multivariate t innovations with `dof` degrees of freedom and unit scale.
pub fn simulate_student(n_series: usize, t: usize, dof: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = SimRng::new(seed);
    let chi = rand_distr::ChiSquared::new(dof).unwrap();
    let mut out = DMatrix::zeros(t, n_series);
    for r in 0..t {
        let s = (chi.sample(&mut rng) / dof).sqrt();
        for j in 0..n_series {
            let z: f64 = StandardNormal.sample(&mut rng);
            out[(r, j)] = z / s;
        }
    }
    out
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)).sqrt()
}

/// Forecast set with normal conditional densities for one series per entry
/// of `draws[origin][series]`, realized values `realized[origin][series]`.
pub fn make_set(
    model: &str,
    draws: &[Vec<Vec<f64>>],
    cond_sd: f64,
    realized: &[Vec<f64>],
) -> bvarcast::forecast::ForecastSet {
    use bvarcast::bvar::ModelSpec;
    use bvarcast::forecast::{ForecastManifest, ForecastSet, OriginForecast, RollingPlan, SeriesForecast, SeriesPredictive};
    let n_series = realized[0].len();
    let m = draws[0][0].len();
    let mut spec = ModelSpec::from_label(model).unwrap_or_else(|_| ModelSpec::from_label("BVAR").unwrap());
    spec.n_iter = m + 1;
    spec.n_burn = 1;
    let plan = RollingPlan {
        window: 60,
        first_origin: 0,
        n_origins: realized.len(),
        stride: 1,
    };
    let mut manifest = ForecastManifest::new(&spec, &plan, (0..n_series).map(|j| format!("S{j}")).collect());
    manifest.model = model.to_string();
    let start = chrono::NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
    let records = realized
        .iter()
        .enumerate()
        .map(|(o, row)| OriginForecast {
            origin: o,
            date: start + chrono::Days::new(o as u64),
            series: row
                .iter()
                .enumerate()
                .map(|(j, y)| SeriesForecast {
                    realized: *y,
                    predictive: SeriesPredictive {
                        draws: draws[o][j].clone(),
                        cond_mean: draws[o][j].clone(),
                        cond_var: vec![cond_sd * cond_sd; m],
                        eta: None,
                    },
                })
                .collect(),
        })
        .collect();
    ForecastSet {
        manifest,
        records,
        failures: Vec::new(),
    }
}

pub fn normal_draws(rng: &mut SimRng, m: usize, mean: f64, sd: f64) -> Vec<f64> {
    (0..m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + sd * z
        })
        .collect()
}
