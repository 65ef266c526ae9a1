//! Seeded Monte Carlo experiments with verdicts and persisted reports.

pub mod config;
pub mod report;
pub mod runners;

pub use config::{parse_power_spec, ConfigPairs, ExperimentConfig, ExperimentKind, Family};
pub use report::{Check, Ensemble, ExperimentReport, Outcome, Provenance, ReportRow};
pub use runners::{
    log_log_slope, quadratic_variation_target, replicate, rho_double_integral_linear, run_covariance_bound,
    run_experiment, run_gaussian_convergence, run_gaussian_mean, run_localtime_convergence, run_lm_decay,
    run_quadratic_variation, run_squared_gaussian, variance_decay, worker_threads, THREADS_ENV,
};
