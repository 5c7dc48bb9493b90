//! Seeded Monte Carlo experiments, reports, the matrix file format and the
//! embedded self-test.

mod ccm_file;
mod config;
mod experiment;
mod report;
mod selftest;

pub use ccm_file::{format_ccm, parse_ccm, read_ccm};
pub use config::{parse_list, ExperimentConfig, Scheme};
pub use experiment::{
    optimal_curve, prepare_trial, run_experiment, run_sweep, run_trial, solve, trial_seed, PreparedTrial, TrialRecord,
};
pub use report::{emit_report, write_report, ReportFormat, CSV_HEADER};
pub use selftest::{selftest, CheckResult, SelftestSummary, SelftestTolerances};
