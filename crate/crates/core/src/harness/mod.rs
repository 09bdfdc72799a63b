//! Experiment runner: configs in, drift reports and files out.

pub mod acceptance;
pub mod config;
pub mod run;

pub use acceptance::{criterion_names, run_criterion, run_suite, CriterionRow};
pub use config::{parse_config, parse_config_file, validate, ExperimentConfig, Prepared};
pub use run::{
    drift_abs, drift_rel, flux_balance_err, run, run_file, sample_series, ConvergenceOrders,
    DriftReport, OrderFit, RunOutcome, DRIFT_REL_FLOOR,
};
