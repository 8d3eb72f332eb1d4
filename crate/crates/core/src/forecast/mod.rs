//! Rolling one-step-ahead predictive simulation and draw-file storage.

mod predictive;
mod rolling;
mod store;

pub use predictive::{garch_next_variance, one_step_predictive, propagate_log_volatility, LastState, SeriesPredictive};
pub use rolling::{forecast_origin, run_rolling, ForecastSet, OriginFailure, OriginForecast, RollingPlan, SeriesForecast};
pub use store::{load_forecasts, store_forecasts, version_string, DrawWriter, ForecastManifest};
