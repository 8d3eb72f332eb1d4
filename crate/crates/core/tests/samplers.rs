mod common;

use bvarcast::bvar::{
    bic_lag_scan, build_design_from_values, estimate, minnesota_moments, reduced_form_covariance,
    residual_log_dets, sample_ar, sample_bvar_const, triangular_factorization, Family, MinnesotaHyper, ModelSpec,
    Volatility, VolatilityDraws,
};
use bvarcast::kernels::{cholesky_lower, SimRng};
use common::*;
use nalgebra::{DMatrix, DVector};

fn const_spec(n_iter: usize, n_burn: usize, lags: usize) -> ModelSpec {
    ModelSpec::new(Family::Var, Volatility::Constant)
        .with_budget(n_iter, n_burn)
        .with_lags(lags)
}

fn ols(values: &DMatrix<f64>, lags: usize) -> DVector<f64> {
    let d = build_design_from_values(values, lags, None).unwrap();
    let b = (d.x.transpose() * &d.x).lu().solve(&(d.x.transpose() * &d.y)).unwrap();
    let (k, n) = b.shape();
    DVector::from_fn(n * k, |idx, _| b[(idx % k, idx / k)])
}

#[test]
fn const_sampler_recovers_bivariate_var() {
    let coefs = vec![DMatrix::from_row_slice(2, 2, &[0.4, 0.1, -0.2, 0.3])];
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    let y = simulate_var(&coefs, &sigma, 2000, 1);
    let spec = const_spec(1500, 500, 1);
    let mut rng = SimRng::new(2);
    let draws = estimate(&spec, &y, None, &mut rng).unwrap();
    assert_eq!(draws.len(), 1000);
    let truth = stack_truth(&coefs);
    let (m, s) = (draws.beta_mean(), draws.beta_std());
    for i in 0..truth.len() {
        assert!((m[i] - truth[i]).abs() < 3.0 * s[i], "coef {i}: {} vs {}", m[i], truth[i]);
    }
}

#[test]
fn tight_prior_shrinks_to_zero_monotonically() {
    let coefs = vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5])];
    let y = simulate_var(&coefs, &DMatrix::identity(2, 2), 300, 3);
    let mut norms = Vec::new();
    for overall in [1e-4, 1e-2, 0.1, 1.0] {
        let mut spec = const_spec(600, 200, 1);
        spec.prior = MinnesotaHyper {
            overall,
            ..Default::default()
        };
        let mut rng = SimRng::new(4);
        let draws = estimate(&spec, &y, None, &mut rng).unwrap();
        norms.push(draws.beta_mean().norm());
    }
    assert!(norms[0] < 1e-3, "{norms:?}");
    assert!(norms.windows(2).all(|w| w[0] < w[1]), "{norms:?}");
}

#[test]
fn diffuse_prior_matches_ols() {
    let coefs = vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.3, 0.4])];
    let y = simulate_var(&coefs, &DMatrix::identity(2, 2), 2000, 5);
    let mut spec = const_spec(3000, 500, 1);
    spec.prior.overall = 1e3;
    let mut rng = SimRng::new(6);
    let draws = estimate(&spec, &y, None, &mut rng).unwrap();
    let m = draws.beta_mean();
    let o = ols(&y, 1);
    for i in 0..o.len() {
        assert!(((m[i] - o[i]) / o[i]).abs() < 0.02, "coef {i}: {} vs {}", m[i], o[i]);
    }
}

#[test]
fn univariate_var_is_the_ar_sampler() {
    let coefs = vec![DMatrix::from_element(1, 1, 0.3)];
    let y = simulate_var(&coefs, &DMatrix::identity(1, 1), 400, 7);
    let spec = const_spec(400, 100, 2);
    let via_var = estimate(&spec, &y, None, &mut SimRng::new(8)).unwrap();
    let series: Vec<f64> = y.column(0).iter().copied().collect();
    let via_ar = sample_ar(&series, 2, &spec, &mut SimRng::new(8)).unwrap();
    assert_eq!(via_var.beta, via_ar.beta);
}

#[test]
fn ar_white_noise_and_ar1() {
    let noise = simulate_var(&[DMatrix::zeros(1, 1)], &DMatrix::identity(1, 1), 2000, 9);
    let series: Vec<f64> = noise.column(0).iter().copied().collect();
    let spec = const_spec(1000, 200, 3);
    let d = sample_ar(&series, 3, &spec, &mut SimRng::new(10)).unwrap();
    assert!(d.beta_mean().iter().all(|b| b.abs() < 0.05), "{:?}", d.beta_mean());

    let ar1 = simulate_var(&[DMatrix::from_element(1, 1, 0.5)], &DMatrix::identity(1, 1), 2000, 11);
    let series: Vec<f64> = ar1.column(0).iter().copied().collect();
    let d = sample_ar(&series, 1, &spec, &mut SimRng::new(12)).unwrap();
    assert!((d.beta_mean()[0] - 0.5).abs() < 0.06);
}

#[test]
fn seed_determinism_for_every_scheme() {
    let y = simulate_var(
        &[DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.1, 0.2])],
        &DMatrix::identity(2, 2),
        150,
        13,
    );
    for vol in [
        Volatility::Constant,
        Volatility::Stochastic,
        Volatility::Garch,
        Volatility::StudentSv,
    ] {
        let spec = ModelSpec::new(Family::Var, vol).with_budget(60, 20).with_lags(1);
        let a = estimate(&spec, &y, None, &mut SimRng::new(99)).unwrap();
        let b = estimate(&spec, &y, None, &mut SimRng::new(99)).unwrap();
        assert_eq!(a, b, "{vol}");
        assert_eq!(a.len(), 40);
        for i in 0..a.len() {
            cholesky_lower(&a.terminal_covariance(i).unwrap()).unwrap();
        }
    }
}

#[test]
fn varx_requires_predictors() {
    let y = simulate_var(&[DMatrix::zeros(2, 2)], &DMatrix::identity(2, 2), 100, 1);
    let spec = ModelSpec::new(Family::Varx, Volatility::Constant).with_budget(20, 5);
    assert!(estimate(&spec, &y, None, &mut SimRng::new(1)).is_err());
    let w = simulate_var(&[DMatrix::zeros(3, 3)], &DMatrix::identity(3, 3), 100, 2);
    let d = estimate(&spec, &y, Some(&w), &mut SimRng::new(1)).unwrap();
    assert_eq!(d.n_regressors(), 2 * 3 + 3);
    assert_eq!(d.beta[0].len(), 2 * 9);
}

#[test]
fn sv_null_case_has_flat_paths_and_unit_triangular_a() {
    let log_var = DMatrix::from_element(800, 2, 0.0);
    let y = simulate_sv(&log_var, 21);
    let mut spec = ModelSpec::new(Family::Var, Volatility::Stochastic)
        .with_budget(1200, 400)
        .with_lags(1);
    spec.keep_paths = true;
    let d = estimate(&spec, &y, None, &mut SimRng::new(22)).unwrap();
    let VolatilityDraws::Stochastic(sv) = &d.volatility else {
        panic!("wrong scheme")
    };
    for m in 0..2 {
        let path: Vec<f64> = sv.log_lambda_mean.column(m).iter().copied().collect();
        assert!(std_dev(&path) < 0.3, "series {m} path std {}", std_dev(&path));
    }
    for a in &sv.a {
        for i in 0..2 {
            assert_eq!(a[(i, i)], 1.0);
            for j in (i + 1)..2 {
                assert_eq!(a[(i, j)], 0.0);
            }
        }
    }
    // reduced-form identity on every stored path point of a few draws
    let paths = sv.log_lambda_paths.as_ref().unwrap();
    for (a, h) in sv.a.iter().zip(paths).step_by(97) {
        for r in (0..h.nrows()).step_by(53) {
            let lambda = h.row(r).transpose().map(f64::exp);
            let sigma = reduced_form_covariance(a, &lambda).unwrap();
            cholesky_lower(&sigma).unwrap();
            let (a2, l2) = triangular_factorization(&sigma).unwrap();
            assert!((a2 - a).abs().max() < 1e-8);
            assert!(((l2 - &lambda).component_div(&lambda)).abs().max() < 1e-8);
        }
    }
}

#[test]
fn sv_detects_volatility_spike() {
    let t = 600;
    let jump = 2.5;
    let log_var = DMatrix::from_fn(t, 1, |r, _| if (300..340).contains(&r) { jump } else { 0.0 });
    let y = simulate_sv(&log_var, 31);
    let spec = ModelSpec::new(Family::Var, Volatility::Stochastic)
        .with_budget(1500, 500)
        .with_lags(1);
    let d = estimate(&spec, &y, None, &mut SimRng::new(32)).unwrap();
    let VolatilityDraws::Stochastic(sv) = &d.volatility else {
        panic!()
    };
    let pre = mean(&sv.log_lambda_mean.column(0).rows(200, 80).iter().copied().collect::<Vec<_>>());
    let at = mean(&sv.log_lambda_mean.column(0).rows(310, 20).iter().copied().collect::<Vec<_>>());
    assert!(at - pre >= 0.5 * jump, "pre {pre}, spike {at}");
}

#[test]
fn garch_null_case_collapses() {
    let y = simulate_garch(1, 1500, 1.0, 0.0, 0.0, 41);
    let spec = ModelSpec::new(Family::Var, Volatility::Garch)
        .with_budget(2000, 800)
        .with_lags(1);
    let d = estimate(&spec, &y, None, &mut SimRng::new(42)).unwrap();
    let VolatilityDraws::Garch(g) = &d.volatility else {
        panic!()
    };
    let arch: Vec<f64> = g.arch.iter().map(|v| v[0]).collect();
    assert!(mean(&arch) < 0.15, "arch mean {}", mean(&arch));
    // the variance path is nearly flat even though the persistence is weakly identified
    let h: Vec<f64> = g.h_mean.column(0).iter().skip(50).copied().collect();
    assert!(std_dev(&h) / mean(&h) < 0.1);
    for i in 0..g.omega.len() {
        assert!(g.omega[i][0] > 0.0);
        assert!(g.arch[i][0] + g.garch[i][0] < 1.0);
    }
}

#[test]
fn student_scales_positive_and_eta_on_grid() {
    let y = simulate_student(2, 500, 5.0, 51);
    let spec = ModelSpec::new(Family::Var, Volatility::StudentSv)
        .with_budget(600, 200)
        .with_lags(1);
    let d = estimate(&spec, &y, None, &mut SimRng::new(52)).unwrap();
    let VolatilityDraws::Stochastic(sv) = &d.volatility else {
        panic!()
    };
    let st = sv.student.as_ref().unwrap();
    assert!(st.scale_min > 0.0);
    assert!(st.eta.iter().all(|e| (3.0..=40.0).contains(e) && e.fract() == 0.0));
}

#[test]
fn bic_selects_true_lag() {
    let coefs = vec![
        DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.2]),
        DMatrix::from_row_slice(2, 2, &[-0.3, 0.0, 0.1, 0.25]),
    ];
    let mut hits = 0;
    for rep in 0..50 {
        let y = simulate_var(&coefs, &DMatrix::identity(2, 2), 1000, 100 + rep);
        let scores = bic_lag_scan(&y, 5).unwrap();
        let best = scores
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
            + 1;
        if best == 2 {
            hits += 1;
        }
        let dets = residual_log_dets(&y, 5).unwrap();
        assert!(dets.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
    assert!(hits >= 45, "hits {hits}/50");
}

#[test]
fn bic_prefers_smallest_model_on_white_noise() {
    let mut hits = 0;
    for rep in 0..20 {
        let y = simulate_var(&[DMatrix::zeros(1, 1)], &DMatrix::identity(1, 1), 500, 300 + rep);
        let scores = bic_lag_scan(&y, 4).unwrap();
        if scores.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 == 0 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn bic_rejects_short_sample() {
    let y = DMatrix::from_element(8, 2, 1.0);
    assert!(bic_lag_scan(&y, 3).is_err());
}

#[test]
fn const_sampler_draw_count_and_spd() {
    let y = simulate_var(&[DMatrix::zeros(3, 3)], &DMatrix::identity(3, 3), 200, 61);
    let d = build_design_from_values(&y, 2, None).unwrap();
    let prior = minnesota_moments(&MinnesotaHyper::default(), &y, 2, None).unwrap();
    let spec = const_spec(300, 100, 2);
    let draws = sample_bvar_const(&spec, &d, &prior, &mut SimRng::new(62)).unwrap();
    assert_eq!(draws.len(), 200);
    let VolatilityDraws::Constant { sigma } = &draws.volatility else {
        panic!()
    };
    assert!(sigma.iter().all(|s| cholesky_lower(s).is_ok()));
}
