use std::path::Path;
use std::sync::Mutex;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predictive::{one_step_predictive, LastState, SeriesPredictive};
use super::store::{DrawWriter, ForecastManifest};
use crate::bvar::{estimate, sample_ar, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::kernels::SimRng;
use crate::market_data::{PredictorPanel, ReturnPanel};

/// Fixed-length trailing window schedule.
///
/// Origin `o` fits rows `[o, o + window)` and forecasts row `o + window`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingPlan {
    pub window: usize,
    pub first_origin: usize,
    pub n_origins: usize,
    pub stride: usize,
}

impl Default for RollingPlan {
    fn default() -> Self {
        Self {
            window: 731,
            first_origin: 0,
            n_origins: 567,
            stride: 1,
        }
    }
}

impl RollingPlan {
    pub const MIN_WINDOW: usize = 50;

    /// Plan whose origins run to the final row of a `n_rows` panel.
    pub fn to_end(window: usize, n_rows: usize) -> Result<Self> {
        if n_rows <= window {
            return Err(Error::TooFewObservations {
                needed: window + 1,
                got: n_rows,
            });
        }
        let plan = Self {
            window,
            first_origin: 0,
            n_origins: n_rows - window,
            stride: 1,
        };
        plan.validate(n_rows)?;
        Ok(plan)
    }

    /// Keeps the window and stride but uses only the last `n` origins that fit.
    pub fn last_origins(window: usize, n: usize, n_rows: usize) -> Result<Self> {
        let mut plan = Self::to_end(window, n_rows)?;
        if n > plan.n_origins {
            return Err(Error::TooFewObservations {
                needed: window + n,
                got: n_rows,
            });
        }
        plan.first_origin = plan.n_origins - n;
        plan.n_origins = n;
        Ok(plan)
    }

    pub fn origins(&self) -> Vec<usize> {
        (0..self.n_origins).map(|k| self.first_origin + k * self.stride).collect()
    }

    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.window < Self::MIN_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "window {} below the minimum of {}",
                self.window,
                Self::MIN_WINDOW
            )));
        }
        if self.n_origins == 0 || self.stride == 0 {
            return Err(Error::InvalidParameter("plan needs at least one origin and stride >= 1".into()));
        }
        let last = self.first_origin + (self.n_origins - 1) * self.stride;
        if last + self.window + 1 > n_rows {
            return Err(Error::TooFewObservations {
                needed: last + self.window + 1,
                got: n_rows,
            });
        }
        Ok(())
    }
}

/// Predictive sample and outcome for one series at one origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesForecast {
    pub realized: f64,
    pub predictive: SeriesPredictive,
}

impl SeriesForecast {
    /// Mean of the predictive draws.
    pub fn point(&self) -> f64 {
        self.predictive.point()
    }

    pub fn draws(&self) -> &[f64] {
        &self.predictive.draws
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginForecast {
    pub origin: usize,
    /// Date of the forecast target row.
    pub date: NaiveDate,
    pub series: Vec<SeriesForecast>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginFailure {
    pub origin: usize,
    pub date: NaiveDate,
    pub message: String,
}

/// Rolling forecasts for one model, sorted by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub manifest: ForecastManifest,
    pub records: Vec<OriginForecast>,
    pub failures: Vec<OriginFailure>,
}

impl ForecastSet {
    pub fn model(&self) -> &str {
        &self.manifest.model
    }

    pub fn series_names(&self) -> &[String] {
        &self.manifest.series
    }

    pub fn n_series(&self) -> usize {
        self.manifest.series.len()
    }

    pub fn n_origins(&self) -> usize {
        self.records.len()
    }

    pub fn series_index(&self, name: &str) -> Option<usize> {
        self.manifest.series.iter().position(|s| s == name)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.records.iter().map(|r| r.date).collect()
    }

    pub fn origins(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.origin).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty() && self.records.len() == self.manifest.plan.n_origins
    }

    /// Forecasts of series `i` across origins.
    pub fn series(&self, i: usize) -> impl Iterator<Item = &SeriesForecast> + '_ {
        self.records.iter().map(move |r| &r.series[i])
    }

    pub fn realized(&self, i: usize) -> Vec<f64> {
        self.series(i).map(|s| s.realized).collect()
    }

    pub fn points(&self, i: usize) -> Vec<f64> {
        self.series(i).map(SeriesForecast::point).collect()
    }

    /// Checks record shapes against the manifest.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_series();
        let m = self.manifest.draws;
        for rec in &self.records {
            if rec.series.len() != n {
                return Err(Error::Dimension(format!(
                    "origin {} has {} series, manifest lists {n}",
                    rec.origin,
                    rec.series.len()
                )));
            }
            for s in &rec.series {
                let p = &s.predictive;
                if p.draws.len() != m || p.cond_mean.len() != m || p.cond_var.len() != m {
                    return Err(Error::Dimension(format!(
                        "origin {} draw count differs from manifest ({m})",
                        rec.origin
                    )));
                }
                if p.eta.as_ref().is_some_and(|e| e.len() != m) {
                    return Err(Error::Dimension(format!("origin {} eta count differs", rec.origin)));
                }
                if !s.realized.is_finite() || p.cond_var.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::Dimension(format!(
                        "origin {} has a non-finite realization or non-positive variance",
                        rec.origin
                    )));
                }
            }
        }
        Ok(())
    }

    fn sort(&mut self) {
        self.records.sort_by_key(|r| r.origin);
        self.failures.sort_by_key(|f| f.origin);
    }
}

fn check_inputs(panel: &ReturnPanel, predictors: Option<&PredictorPanel>, spec: &ModelSpec) -> Result<()> {
    spec.validate()?;
    if spec.family == Family::Varx {
        let w = predictors.ok_or_else(|| Error::InvalidParameter("VARX models need a predictor panel".into()))?;
        if w.dates() != panel.dates() {
            return Err(Error::Misaligned("predictor dates do not match the return panel".into()));
        }
    }
    Ok(())
}

/// Fits `spec` on the window ending before row `origin + window` and simulates that row.
pub fn forecast_origin(
    panel: &ReturnPanel,
    predictors: Option<&PredictorPanel>,
    spec: &ModelSpec,
    plan: &RollingPlan,
    origin: usize,
) -> Result<OriginForecast> {
    check_inputs(panel, predictors, spec)?;
    let r = plan.window;
    let target = origin + r;
    if target >= panel.n_rows() {
        return Err(Error::TooFewObservations {
            needed: target + 1,
            got: panel.n_rows(),
        });
    }
    let n = panel.n_series();
    let fit = panel.values().rows(origin, r).into_owned();
    let mut rng = SimRng::stream(spec.seed, origin as u64);

    let predictive = match spec.family {
        Family::Ar => {
            let mut out = Vec::with_capacity(n);
            for j in 0..n {
                let col: Vec<f64> = fit.column(j).iter().copied().collect();
                let draws = sample_ar(&col, spec.lags, spec, &mut rng)?;
                let state = LastState {
                    history: DMatrix::from_column_slice(spec.lags, 1, &col[r - spec.lags..]),
                    exog_last: None,
                };
                out.extend(one_step_predictive(&draws, &state, &mut rng)?);
            }
            out
        }
        Family::Var | Family::Varx => {
            let exog = match (spec.family, predictors) {
                (Family::Varx, Some(w)) => Some(w.values().rows(origin, r).into_owned()),
                _ => None,
            };
            let draws = estimate(spec, &fit, exog.as_ref(), &mut rng)?;
            let state = LastState {
                history: fit.rows(r - spec.lags, spec.lags).into_owned(),
                exog_last: exog.as_ref().map(|w| w.row(r - 1).iter().copied().collect()),
            };
            one_step_predictive(&draws, &state, &mut rng)?
        }
    };

    let series = predictive
        .into_iter()
        .enumerate()
        .map(|(j, p)| SeriesForecast {
            realized: panel.values()[(target, j)],
            predictive: p,
        })
        .collect();
    Ok(OriginForecast {
        origin,
        date: panel.dates()[target],
        series,
    })
}

/// Runs every origin of `plan`, in parallel, writing each finished origin to
/// `store` when given. Origins already present in an existing compatible
/// store are loaded instead of recomputed. Sampler failures are recorded per
/// origin and do not stop the run.
pub fn run_rolling(
    panel: &ReturnPanel,
    predictors: Option<&PredictorPanel>,
    spec: &ModelSpec,
    plan: &RollingPlan,
    store: Option<&Path>,
) -> Result<ForecastSet> {
    check_inputs(panel, predictors, spec)?;
    plan.validate(panel.n_rows())?;
    let manifest = ForecastManifest::new(spec, plan, panel.names().to_vec());

    let (done, writer) = match store {
        Some(path) => {
            let (done, writer) = DrawWriter::open(path, &manifest)?;
            (done, Some(writer))
        }
        None => (Vec::new(), None),
    };
    let pending: Vec<usize> = plan
        .origins()
        .into_iter()
        .filter(|o| !done.iter().any(|d| d.origin == *o))
        .collect();
    log::info!(
        "{}: {} origins, {} loaded from store, {} to run",
        manifest.model,
        plan.n_origins,
        done.len(),
        pending.len()
    );

    let writer = writer.map(Mutex::new);
    let outcomes: Vec<std::result::Result<OriginForecast, OriginFailure>> = pending
        .par_iter()
        .map(|&origin| {
            let outcome = forecast_origin(panel, predictors, spec, plan, origin).map_err(|e| OriginFailure {
                origin,
                date: panel.dates()[origin + plan.window],
                message: e.to_string(),
            });
            match &outcome {
                Ok(rec) => log::info!("{}: origin {} ({}) done", manifest.model, origin, rec.date),
                Err(f) => log::warn!("{}: origin {} failed: {}", manifest.model, origin, f.message),
            }
            if let Some(w) = writer.as_ref() {
                let mut guard = w.lock().unwrap_or_else(|p| p.into_inner());
                let written = match &outcome {
                    Ok(rec) => guard.append(rec),
                    Err(f) => guard.append_failure(f),
                };
                if let Err(e) = written {
                    log::error!("could not write origin {origin}: {e}");
                }
            }
            outcome
        })
        .collect();

    let mut set = ForecastSet {
        manifest,
        records: done,
        failures: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(rec) => set.records.push(rec),
            Err(f) => set.failures.push(f),
        }
    }
    set.sort();
    set.manifest.incomplete = set.failures.iter().map(|f| f.origin).collect();
    if let Some(path) = store {
        drop(writer);
        super::store::store_forecasts(&set, path)?;
    }
    Ok(set)
}
