//! Probabilistic scores for sampled ensembles and report tables.

mod report;
mod scores;

pub use report::{build_report, evaluate_model, MetricReport, MetricRow};
pub use scores::{
    crps, crps_mean, empirical_quantile, energy_score, mae_rmse, mean_quantile_score, mse_per_time, pinball,
    quantile_score, variogram_score, Ensemble, QUANTILE_LEVELS,
};
