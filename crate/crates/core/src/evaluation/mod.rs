//! Point and density forecast measures, Diebold-Mariano tests and the model
//! confidence set.

mod dm;
mod mcs;
mod metrics;
mod report;

pub use dm::{dm_test, DmResult};
pub use mcs::{default_block_length, model_confidence_set, McsConfig, McsResult};
pub use metrics::{
    crps, crps_draws, interval_violations, log_predictive_density, log_score, loss_series, predictive_band,
    quantile_sorted, rmse, rmse_values, success_rate, success_rate_values, LossKind, LossSeries,
};
pub use report::{build_report, EvaluationReport, Metric, MetricTable, ModelRow};
