mod common;

use bvarcast::evaluation::{
    build_report, crps, crps_draws, dm_test, interval_violations, log_predictive_density, log_score,
    model_confidence_set, rmse, success_rate, McsConfig, Metric,
};
use bvarcast::forecast::SeriesPredictive;
use bvarcast::kernels::SimRng;
use common::{make_set, normal_draws};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn std_normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Grid integral of `(F_emp(x) - 1{x >= y})^2`.
fn crps_by_integration(draws: &[f64], y: f64) -> f64 {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    let lo = s[0].min(y) - 1.0;
    let hi = s[s.len() - 1].max(y) + 1.0;
    let steps = 400_000;
    let h = (hi - lo) / steps as f64;
    let m = s.len() as f64;
    let mut idx = 0;
    let mut total = 0.0;
    for k in 0..steps {
        let x = lo + (k as f64 + 0.5) * h;
        while idx < s.len() && s[idx] <= x {
            idx += 1;
        }
        let f = idx as f64 / m;
        let heaviside = if x >= y { 1.0 } else { 0.0 };
        total += (f - heaviside).powi(2) * h;
    }
    total
}

#[test]
fn crps_matches_numerical_integration() {
    let mut rng = SimRng::new(1);
    let draws = normal_draws(&mut rng, 5000, 0.0, 1.0);
    for _ in 0..5 {
        let y = 2.0 * std_normal(&mut rng);
        let a = crps_draws(&draws, y);
        let b = crps_by_integration(&draws, y);
        assert!((a - b).abs() < 1e-3, "y {y}: {a} vs {b}");
    }
}

#[test]
fn crps_close_to_gaussian_closed_form() {
    let mut rng = SimRng::new(2);
    let draws = normal_draws(&mut rng, 5000, 0.0, 1.0);
    let y: f64 = 0.7;
    let pdf = (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let exact = y * (2.0 * normal_cdf(y) - 1.0) + 2.0 * pdf - 1.0 / std::f64::consts::PI.sqrt();
    assert!((crps_draws(&draws, y) - exact).abs() < 0.02);
}

#[test]
fn log_score_of_identical_components_is_analytic() {
    let mut rng = SimRng::new(3);
    let pred = SeriesPredictive {
        draws: normal_draws(&mut rng, 5000, 0.5, 2.0),
        cond_mean: vec![0.5; 5000],
        cond_var: vec![4.0; 5000],
        eta: None,
    };
    let y: f64 = -1.3;
    let exact = -0.5 * ((2.0 * std::f64::consts::PI * 4.0).ln() + (y - 0.5).powi(2) / 4.0);
    assert!((log_predictive_density(&pred, y).unwrap() - exact).abs() < 0.01);
}

#[test]
fn success_rate_of_independent_signs_is_half() {
    let mut rng = SimRng::new(4);
    let n = 10_000;
    let draws: Vec<Vec<Vec<f64>>> = (0..n).map(|_| vec![vec![std_normal(&mut rng); 2]]).collect();
    let realized: Vec<Vec<f64>> = (0..n).map(|_| vec![std_normal(&mut rng)]).collect();
    let set = make_set("BVAR", &draws, 1.0, &realized);
    let rate = success_rate(&set).unwrap()[0];
    assert!((rate - 50.0).abs() < 2.0, "{rate}");
}

#[test]
fn interval_violations_nominal_rate() {
    let mut rng = SimRng::new(5);
    let n = 10_000;
    let draws: Vec<Vec<Vec<f64>>> = (0..n).map(|_| vec![normal_draws(&mut rng, 200, 0.0, 1.0)]).collect();
    let realized: Vec<Vec<f64>> = (0..n).map(|_| vec![std_normal(&mut rng)]).collect();
    let set = make_set("BVAR", &draws, 1.0, &realized);
    let v = interval_violations(&set, 0.95).unwrap()[0];
    assert!((v - 5.0).abs() < 0.7 + 0.3, "{v}");
}

#[test]
fn median_realizations_never_violate() {
    let mut rng = SimRng::new(6);
    let draws: Vec<Vec<Vec<f64>>> = (0..50).map(|_| vec![normal_draws(&mut rng, 101, 0.0, 1.0)]).collect();
    let realized: Vec<Vec<f64>> = draws
        .iter()
        .map(|d| {
            let mut s = d[0].clone();
            s.sort_by(f64::total_cmp);
            vec![s[50]]
        })
        .collect();
    let set = make_set("BVAR", &draws, 1.0, &realized);
    assert_eq!(interval_violations(&set, 0.95).unwrap()[0], 0.0);
}

#[test]
fn dm_size_and_power_small_sample() {
    let mut rng = SimRng::new(7);
    let reps = 1000;
    let n = 567;
    let zero = vec![0.0; n];
    let (mut size, mut power) = (0, 0);
    for _ in 0..reps {
        let d0: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
        let d1: Vec<f64> = d0.iter().map(|v| v + 0.5).collect();
        size += usize::from(dm_test(&d0, &zero, 1).unwrap().p_value < 0.05);
        power += usize::from(dm_test(&d1, &zero, 1).unwrap().p_value < 0.05);
    }
    let size = size as f64 / reps as f64;
    assert!((0.025..0.08).contains(&size), "size {size}");
    assert_eq!(power, reps);
}

#[test]
fn mcs_keeps_equal_models_mostly() {
    let mut kept = 0;
    for rep in 0..40u64 {
        let mut rng = SimRng::new(100 + rep);
        let losses: Vec<Vec<f64>> = (0..3).map(|_| (0..200).map(|_| std_normal(&mut rng).powi(2)).collect()).collect();
        let cfg = McsConfig {
            reps: 500,
            seed: rep,
            ..McsConfig::default()
        };
        kept += usize::from(model_confidence_set(&losses, &cfg).unwrap().survivors.len() == 3);
    }
    assert!(kept >= 30, "{kept}/40");
}

fn two_series_set(model: &str, seed: u64, bias: f64, n: usize) -> bvarcast::forecast::ForecastSet {
    let mut rng = SimRng::new(seed);
    let mut truth = SimRng::new(999);
    let draws: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| (0..2).map(|_| normal_draws(&mut rng, 200, bias, 1.0)).collect())
        .collect();
    let realized: Vec<Vec<f64>> = (0..n).map(|_| vec![std_normal(&mut truth), std_normal(&mut truth)]).collect();
    make_set(model, &draws, 1.0, &realized)
}

#[test]
fn report_benchmark_against_itself() {
    let b = two_series_set("BVAR", 1, 0.0, 60);
    let cfg = McsConfig {
        reps: 200,
        ..McsConfig::default()
    };
    let report = build_report(std::slice::from_ref(&b), "BVAR", &cfg).unwrap();
    for t in &report.tables {
        let row = &t.rows[0];
        for j in 0..2 {
            match t.metric {
                Metric::Rmse | Metric::Crps => assert_eq!(row.relative[j], 1.0),
                Metric::LogScore => assert_eq!(row.relative[j], 0.0),
                _ => {}
            }
            assert_eq!(row.stars[j], 0);
        }
    }
    // a renamed copy compares as identical: no stars, everyone in the MCS
    let mut copy = b.clone();
    copy.manifest.model = "BVAR-SV".into();
    let report = build_report(&[b, copy], "BVAR", &cfg).unwrap();
    let t = report.table(Metric::Rmse);
    assert_eq!(t.rows[1].relative, vec![1.0, 1.0]);
    assert_eq!(t.rows[1].stars, vec![0, 0]);
    assert!(t.rows.iter().all(|r| r.mcs.iter().all(|m| *m == Some(true))));
}

#[test]
fn report_dominance_and_ratios() {
    let bench = two_series_set("BVAR", 2, 1.5, 300);
    let good = two_series_set("BVAR-SV", 3, 0.0, 300);
    let cfg = McsConfig {
        reps: 500,
        ..McsConfig::default()
    };
    let report = build_report(&[bench, good], "BVAR", &cfg).unwrap();
    let rmse_t = report.table(Metric::Rmse);
    for j in 0..2 {
        assert!(rmse_t.rows[1].relative[j] < 1.0);
        assert_eq!(rmse_t.rows[1].stars[j], 2);
        assert_eq!(rmse_t.rows[1].mcs[j], Some(true));
        assert_eq!(rmse_t.rows[0].mcs[j], Some(false));
    }
    assert!(report.table(Metric::LogScore).rows[1].relative.iter().all(|v| *v > 0.0));
    let mut csv = Vec::new();
    rmse_t.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("model,S0,S1,raw_S0"));
    assert!(report.to_text().contains("BVAR-SV"));
}

#[test]
fn report_worse_model_gets_no_stars() {
    let bench = two_series_set("BVAR", 2, 0.0, 300);
    let bad = two_series_set("BVAR-SV", 3, 1.5, 300);
    let cfg = McsConfig {
        reps: 300,
        ..McsConfig::default()
    };
    let report = build_report(&[bench, bad], "BVAR", &cfg).unwrap();
    let row = &report.table(Metric::Rmse).rows[1];
    assert!(row.relative.iter().all(|v| *v > 1.0));
    assert_eq!(row.stars, vec![0, 0]);
    assert!(row.dm_p.iter().all(|p| p.unwrap() < 0.05));
}

#[test]
fn report_rejects_origin_mismatch_and_missing_benchmark() {
    let a = two_series_set("BVAR", 1, 0.0, 30);
    let b = two_series_set("BVAR-SV", 1, 0.0, 31);
    assert!(build_report(&[a.clone(), b], "BVAR", &McsConfig::default()).is_err());
    assert!(build_report(&[a], "BVAR-GARCH", &McsConfig::default()).is_err());
}

fn small_set(values: &[(f64, f64, f64)]) -> bvarcast::forecast::ForecastSet {
    // (centre, spread, realized) per origin, 5 draws each
    let draws: Vec<Vec<Vec<f64>>> = values
        .iter()
        .map(|(c, s, _)| vec![(0..5).map(|k| c + s * (k as f64 - 2.0)).collect()])
        .collect();
    let realized: Vec<Vec<f64>> = values.iter().map(|(_, _, y)| vec![*y]).collect();
    make_set("BVAR", &draws, 1.0, &realized)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_invariant_to_origin_order(
        v in prop::collection::vec((-3.0f64..3.0, 0.1f64..2.0, -3.0f64..3.0), 3..20),
        seed in any::<u64>(),
    ) {
        let a = small_set(&v);
        let mut shuffled = v.clone();
        let mut rng = SimRng::new(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let b = small_set(&shuffled);
        for (x, y) in [
            (rmse(&a).unwrap()[0], rmse(&b).unwrap()[0]),
            (crps(&a).unwrap()[0], crps(&b).unwrap()[0]),
            (log_score(&a).unwrap()[0], log_score(&b).unwrap()[0]),
        ] {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn draw_order_irrelevant(mut draws in prop::collection::vec(-5.0f64..5.0, 10..60), y in -5.0f64..5.0) {
        let a = crps_draws(&draws, y);
        draws.reverse();
        draws.rotate_left(3);
        prop_assert!((a - crps_draws(&draws, y)).abs() < 1e-12);
    }

    #[test]
    fn scale_equivariance(
        v in prop::collection::vec((-3.0f64..3.0, 0.1f64..2.0, -3.0f64..3.0), 3..15),
        c in 0.1f64..10.0,
    ) {
        let a = small_set(&v);
        let scaled: Vec<(f64, f64, f64)> = v.iter().map(|(m, s, y)| (m * c, s * c, y * c)).collect();
        let mut b = small_set(&scaled);
        for rec in &mut b.records {
            for s in &mut rec.series {
                s.predictive.cond_var.iter_mut().for_each(|x| *x *= c * c);
            }
        }
        let (ra, rb) = (rmse(&a).unwrap()[0], rmse(&b).unwrap()[0]);
        prop_assert!((rb - c * ra).abs() <= 1e-9 * (1.0 + rb.abs()));
        let (ca, cb) = (crps(&a).unwrap()[0], crps(&b).unwrap()[0]);
        prop_assert!((cb - c * ca).abs() <= 1e-9 * (1.0 + cb.abs()));
        let (la, lb) = (log_score(&a).unwrap()[0], log_score(&b).unwrap()[0]);
        prop_assert!((lb - (la - c.ln())).abs() <= 1e-9 * (1.0 + lb.abs()));
    }

    #[test]
    fn dm_antisymmetric(
        a in prop::collection::vec(-10.0f64..10.0, 12..40),
        shift in -1.0f64..1.0,
        h in 1usize..4,
    ) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * 0.5 + shift + (i % 3) as f64).collect();
        let ab = dm_test(&a, &b, h);
        let ba = dm_test(&b, &a, h);
        if let (Ok(ab), Ok(ba)) = (ab, ba) {
            prop_assert!((ab.statistic + ba.statistic).abs() < 1e-9 * (1.0 + ab.statistic.abs()));
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        }
    }
}
