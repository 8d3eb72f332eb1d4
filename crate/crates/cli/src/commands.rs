use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use bvarcast::bvar::Family;
use bvarcast::evaluation::{build_report, predictive_band, Metric};
use bvarcast::forecast::{load_forecasts, run_rolling, ForecastSet};
use bvarcast::market_data::{align_predictors_with_log, describe, returns_panel, Panel, PriceSeries};

use crate::config::{file_stem, RunConfig};

fn read_prices(cfg: &RunConfig, name: &str, clip_start: bool) -> Result<PriceSeries> {
    let path = cfg.data.dir.join(format!("{name}.csv"));
    let series = PriceSeries::from_csv_path(name, &path)?;
    let keep = |d: &chrono::NaiveDate| {
        (!clip_start || cfg.data.start.is_none_or(|s| *d >= s)) && cfg.data.end.is_none_or(|e| *d <= e)
    };
    if series.observations().iter().all(|(d, _)| keep(d)) {
        return Ok(series);
    }
    let obs = series.observations().iter().copied().filter(|(d, _)| keep(d)).collect();
    Ok(PriceSeries::new(name, obs)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("writing {}", path.display()))?,
    ))
}

pub fn ingest(cfg: &RunConfig) -> Result<()> {
    let targets: Vec<PriceSeries> = cfg
        .data
        .targets
        .iter()
        .map(|n| read_prices(cfg, n, true))
        .collect::<Result<_>>()?;
    for t in &targets {
        log::info!("{}: {} price rows", t.name(), t.len());
    }
    let returns = returns_panel(&targets)?;
    returns.write_csv(create(&cfg.returns_path())?)?;

    let mut log_file = create(&cfg.run.out.join("ingest.log"))?;
    writeln!(
        log_file,
        "targets: {} return rows from {} to {}",
        returns.n_rows(),
        returns.dates()[0],
        returns.dates()[returns.n_rows() - 1]
    )?;
    if !cfg.data.predictors.is_empty() {
        let raw: Vec<PriceSeries> = cfg
            .data
            .predictors
            .iter()
            .map(|n| read_prices(cfg, n, false))
            .collect::<Result<_>>()?;
        let aligned = align_predictors_with_log(&targets[0].dates(), &raw)?;
        aligned.panel.write_csv(create(&cfg.predictors_path())?)?;
        for (name, dates) in cfg.data.predictors.iter().zip(&aligned.carried_forward) {
            writeln!(log_file, "{name}: {} dates carried forward", dates.len())?;
            for d in dates {
                writeln!(log_file, "{name} {d}")?;
            }
        }
    }
    log_file.flush()?;
    log::info!("wrote panels to {}", cfg.run.out.display());
    Ok(())
}

fn load_returns(cfg: &RunConfig) -> Result<Panel> {
    Panel::read_csv_path(&cfg.returns_path())
        .with_context(|| format!("reading {} (run `ingest` first)", cfg.returns_path().display()))
}

pub fn describe_cmd(cfg: &RunConfig) -> Result<()> {
    let panel = load_returns(cfg)?;
    let stats = describe(&panel)?;
    let path = cfg.run.out.join("table1_descriptive.csv");
    let mut w = create(&path)?;
    writeln!(w, "statistic,{}", panel.names().join(","))?;
    type Getter = fn(&bvarcast::market_data::DescriptiveStats) -> f64;
    let rows: [(&str, Getter); 7] = [
        ("max", |s| s.maximum),
        ("min", |s| s.minimum),
        ("mean", |s| s.mean),
        ("median", |s| s.median),
        ("std", |s| s.std_dev),
        ("skewness", |s| s.skewness),
        ("kurtosis", |s| s.kurtosis),
    ];
    for (label, get) in rows {
        let values: Vec<String> = stats.iter().map(|s| format!("{}", get(s))).collect();
        writeln!(w, "{label},{}", values.join(","))?;
        println!(
            "{label:<9}{}",
            stats.iter().map(|s| format!("{:>12.4}", get(s))).collect::<String>()
        );
    }
    w.flush()?;
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let panel = load_returns(cfg)?;
    let specs = cfg.model_specs()?;
    let predictors = if specs.iter().any(|s| s.family == Family::Varx) {
        Some(Panel::read_csv_path(&cfg.predictors_path()).context("reading predictors.csv")?)
    } else {
        None
    };
    let plan = cfg.plan(panel.n_rows())?;
    log::info!(
        "window {} rows, {} origins from {} to {}",
        plan.window,
        plan.n_origins,
        panel.dates()[plan.first_origin + plan.window],
        panel.dates()[panel.n_rows() - 1]
    );
    let mut incomplete = Vec::new();
    for spec in &specs {
        let path = cfg.draw_path(spec);
        fs::create_dir_all(cfg.draws_dir())?;
        let set = run_rolling(&panel, predictors.as_ref(), spec, &plan, Some(&path))?;
        log::info!("{}: {} origins stored in {}", spec.label(), set.n_origins(), path.display());
        for f in &set.failures {
            incomplete.push(format!("{} origin {} ({}): {}", spec.label(), f.origin, f.date, f.message));
        }
    }
    if !incomplete.is_empty() {
        for line in &incomplete {
            eprintln!("incomplete: {line}");
        }
        bail!("{} origins failed; rerun to retry them", incomplete.len());
    }
    Ok(())
}

fn load_sets(cfg: &RunConfig) -> Result<Vec<ForecastSet>> {
    let sets: Vec<ForecastSet> = cfg
        .model_specs()?
        .iter()
        .map(|spec| {
            let path = cfg.draw_path(spec);
            load_forecasts(&path).with_context(|| format!("loading {}", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut missing = Vec::new();
    for s in &sets {
        if !s.is_complete() {
            missing.push(format!("{} ({} of {} origins)", s.model(), s.n_origins(), s.manifest.plan.n_origins));
        }
        if s.manifest.plan != sets[0].manifest.plan {
            bail!("{} uses a different rolling plan than {}", s.model(), sets[0].model());
        }
    }
    if !missing.is_empty() {
        bail!("incomplete draw files: {}", missing.join(", "));
    }
    Ok(sets)
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    let sets = load_sets(cfg)?;
    let benchmark = cfg.benchmark()?;
    let (multi, uni): (Vec<ForecastSet>, Vec<ForecastSet>) =
        sets.into_iter().partition(|s| s.manifest.family != Family::Ar);
    let mcs = cfg.mcs();
    let report = build_report(&multi, &benchmark, &mcs)?;
    let out = &cfg.run.out;
    for (metric, file) in [
        (Metric::Violations, "table2_coverage.csv"),
        (Metric::Success, "table_success.csv"),
        (Metric::Rmse, "table3_rmse.csv"),
        (Metric::Crps, "table4_crps.csv"),
        (Metric::LogScore, "table6_pl.csv"),
    ] {
        report.table(metric).write_csv(create(&out.join(file))?)?;
    }
    let mut text = report.to_text();

    let bench = multi
        .iter()
        .find(|s| s.model() == benchmark)
        .expect("benchmark checked by build_report");
    let mut univariate = vec![bench.clone()];
    univariate.extend(uni);
    let uni_report = build_report(&univariate, &benchmark, &mcs)?;
    let mut w = create(&out.join("table7_univariate.csv"))?;
    let series = &uni_report.series;
    let header: Vec<String> = ["rmse", "crps"]
        .iter()
        .flat_map(|m| series.iter().map(move |s| format!("{m}_{s}")))
        .collect();
    writeln!(w, "model,{}", header.join(","))?;
    let rmse_t = uni_report.table(Metric::Rmse);
    let crps_t = uni_report.table(Metric::Crps);
    for (r, c) in rmse_t.rows.iter().zip(&crps_t.rows) {
        let vals: Vec<String> = r.raw.iter().chain(&c.raw).map(|v| format!("{v}")).collect();
        writeln!(w, "{},{}", r.model, vals.join(","))?;
    }
    w.flush()?;
    text.push_str("Univariate benchmarks\n");
    text.push_str(&rmse_t.to_text(&benchmark));
    text.push_str(&crps_t.to_text(&benchmark));

    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn plot_data(cfg: &RunConfig, model: &str, series: &str) -> Result<()> {
    let spec = cfg
        .model_specs()?
        .into_iter()
        .find(|s| s.label().eq_ignore_ascii_case(model) || file_stem(&s.label()) == file_stem(model))
        .with_context(|| format!("model `{model}` is not configured"))?;
    let set = load_forecasts(&cfg.draw_path(&spec))?;
    let j = set
        .series_index(series)
        .with_context(|| format!("series `{series}` not in {}", set.model()))?;
    let path = cfg
        .run
        .out
        .join(format!("plot_{}_{}.csv", file_stem(&spec.label()), file_stem(series)));
    let mut w = create(&path)?;
    writeln!(w, "date,realized,point,lower,upper")?;
    for rec in &set.records {
        let s = &rec.series[j];
        let (lo, hi) = predictive_band(s.draws(), 0.95);
        writeln!(w, "{},{},{},{},{}", rec.date, s.realized, s.point(), lo, hi)?;
    }
    w.flush()?;
    log::info!("wrote {}", path.display());
    Ok(())
}
