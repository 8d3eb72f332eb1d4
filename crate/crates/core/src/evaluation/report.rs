use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dm::dm_test;
use super::mcs::{model_confidence_set, McsConfig};
use super::metrics::{crps, interval_violations, log_score, loss_series, rmse, success_rate, LossKind};
use crate::error::{Error, Result};
use crate::forecast::ForecastSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Rmse,
    Crps,
    LogScore,
    Violations,
    Success,
}

impl Metric {
    pub fn title(self) -> &'static str {
        match self {
            Metric::Rmse => "RMSE (ratio to benchmark)",
            Metric::Crps => "CRPS (ratio to benchmark)",
            Metric::LogScore => "Predictive log score (difference to benchmark)",
            Metric::Violations => "Realizations outside the 95% interval (%)",
            Metric::Success => "Success rate (%)",
        }
    }

    fn loss(self) -> Option<LossKind> {
        match self {
            Metric::Rmse => Some(LossKind::SquaredError),
            Metric::Crps => Some(LossKind::Crps),
            Metric::LogScore => Some(LossKind::NegLogScore),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: String,
    /// Metric level per series.
    pub raw: Vec<f64>,
    /// Ratio (RMSE, CRPS) or difference (log score) to the benchmark; equals
    /// `raw` for the other metrics.
    pub relative: Vec<f64>,
    /// Diebold-Mariano p-value against the benchmark.
    pub dm_p: Vec<Option<f64>>,
    /// 2 for 5%, 1 for 10%, only when the model beats the benchmark.
    pub stars: Vec<u8>,
    /// Membership of the 10% model confidence set.
    pub mcs: Vec<Option<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub metric: Metric,
    pub series: Vec<String>,
    pub rows: Vec<ModelRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub benchmark: String,
    pub series: Vec<String>,
    pub n_origins: usize,
    pub tables: Vec<MetricTable>,
}

impl EvaluationReport {
    pub fn table(&self, metric: Metric) -> &MetricTable {
        self.tables
            .iter()
            .find(|t| t.metric == metric)
            .expect("every metric is tabulated")
    }
}

fn stars_for(p: f64) -> u8 {
    if p < 0.05 {
        2
    } else if p < 0.10 {
        1
    } else {
        0
    }
}

fn check_alignment(sets: &[ForecastSet], bench: &ForecastSet) -> Result<()> {
    for s in sets {
        if s.dates() != bench.dates() || s.origins() != bench.origins() {
            return Err(Error::Misaligned(format!(
                "{} and {} forecast different origins",
                s.model(),
                bench.model()
            )));
        }
        if s.series_names() != bench.series_names() {
            return Err(Error::Misaligned(format!("{} covers different series", s.model())));
        }
    }
    Ok(())
}

/// Tabulates all metrics relative to `benchmark`, with DM stars against the
/// benchmark and model-confidence-set membership among all `sets`.
pub fn build_report(sets: &[ForecastSet], benchmark: &str, mcs: &McsConfig) -> Result<EvaluationReport> {
    let bench = sets
        .iter()
        .find(|s| s.model() == benchmark)
        .ok_or_else(|| Error::InvalidParameter(format!("benchmark `{benchmark}` not among the models")))?;
    check_alignment(sets, bench)?;
    let series = bench.series_names().to_vec();
    let n_series = series.len();

    let mut tables = Vec::new();
    for metric in [Metric::Rmse, Metric::Crps, Metric::LogScore, Metric::Violations, Metric::Success] {
        let level = |s: &ForecastSet| match metric {
            Metric::Rmse => rmse(s),
            Metric::Crps => crps(s),
            Metric::LogScore => log_score(s),
            Metric::Violations => interval_violations(s, 0.95),
            Metric::Success => success_rate(s),
        };
        let bench_raw = level(bench)?;
        let mut rows = Vec::with_capacity(sets.len());
        for s in sets {
            let raw = level(s)?;
            let relative = match metric {
                Metric::Rmse | Metric::Crps => raw.iter().zip(&bench_raw).map(|(a, b)| a / b).collect(),
                Metric::LogScore => raw.iter().zip(&bench_raw).map(|(a, b)| a - b).collect(),
                _ => raw.clone(),
            };
            rows.push(ModelRow {
                model: s.model().to_string(),
                raw,
                relative,
                dm_p: vec![None; n_series],
                stars: vec![0; n_series],
                mcs: vec![None; n_series],
            });
        }

        if let Some(kind) = metric.loss() {
            for j in 0..n_series {
                let losses: Vec<Vec<f64>> = sets
                    .iter()
                    .map(|s| loss_series(s, j, kind).map(|l| l.values))
                    .collect::<Result<_>>()?;
                let bench_idx = sets.iter().position(|s| s.model() == benchmark).expect("found above");
                for (i, row) in rows.iter_mut().enumerate() {
                    if i == bench_idx || sets[i].model() == benchmark {
                        continue;
                    }
                    match dm_test(&losses[i], &losses[bench_idx], 1) {
                        Ok(dm) => {
                            row.dm_p[j] = Some(dm.p_value);
                            if dm.mean_difference < 0.0 {
                                row.stars[j] = stars_for(dm.p_value);
                            }
                        }
                        Err(Error::Degenerate(_) | Error::TooFewObservations { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                let members = if sets.len() == 1 {
                    vec![true]
                } else {
                    match model_confidence_set(&losses, mcs) {
                        Ok(r) => (0..sets.len()).map(|i| r.contains(i)).collect(),
                        Err(Error::Degenerate(msg)) => {
                            log::warn!("{}: {msg}; keeping every model", series[j]);
                            vec![true; sets.len()]
                        }
                        Err(e) => return Err(e),
                    }
                };
                for (row, keep) in rows.iter_mut().zip(members) {
                    row.mcs[j] = Some(keep);
                }
            }
        }
        tables.push(MetricTable {
            metric,
            series: series.clone(),
            rows,
        });
    }
    Ok(EvaluationReport {
        benchmark: benchmark.to_string(),
        series,
        n_origins: bench.n_origins(),
        tables,
    })
}

impl MetricTable {
    /// Wide CSV: relative values per series, then levels, DM p-values,
    /// stars and MCS flags.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["model".to_string()];
        for prefix in ["", "raw_", "dm_p_", "stars_", "mcs_"] {
            header.extend(self.series.iter().map(|s| format!("{prefix}{s}")));
        }
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.model.clone()];
            rec.extend(row.relative.iter().map(|v| format!("{v}")));
            rec.extend(row.raw.iter().map(|v| format!("{v}")));
            rec.extend(row.dm_p.iter().map(|p| p.map(|v| format!("{v}")).unwrap_or_default()));
            rec.extend(row.stars.iter().map(|s| "*".repeat(*s as usize)));
            rec.extend(row.mcs.iter().map(|m| m.map(|b| b.to_string()).unwrap_or_default()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Aligned text table. The benchmark row shows levels, other rows the
    /// relative values; `+` marks MCS members.
    pub fn to_text(&self, benchmark: &str) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let bench = row.model == benchmark;
                (0..self.series.len())
                    .map(|j| {
                        let v = if bench { row.raw[j] } else { row.relative[j] };
                        let mut c = format!("{v:.5}{}", "*".repeat(row.stars[j] as usize));
                        if row.mcs[j] == Some(true) {
                            c.push('+');
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        let name_w = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
        let col_w: Vec<usize> = (0..self.series.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([self.series[j].len()]).max().unwrap_or(8))
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.metric.title());
        let _ = write!(s, "{:<name_w$}", "model");
        for (name, w) in self.series.iter().zip(&col_w) {
            let _ = write!(s, "  {name:>w$}");
        }
        s.push('\n');
        for (row, c) in self.rows.iter().zip(&cells) {
            let _ = write!(s, "{:<name_w$}", row.model);
            for (cell, w) in c.iter().zip(&col_w) {
                let _ = write!(s, "  {cell:>w$}");
            }
            s.push('\n');
        }
        s
    }
}

impl EvaluationReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "Benchmark: {} ({} origins). Benchmark rows show levels.\n\
             * and ** mark Diebold-Mariano rejections in the model's favour at 10% and 5%; \
             + marks members of the 10% model confidence set.\n\n",
            self.benchmark, self.n_origins
        );
        for t in &self.tables {
            s.push_str(&t.to_text(&self.benchmark));
            s.push('\n');
        }
        s
    }
}
