//! Config-driven experiment runner behind the `prgd` binary.

mod config;
mod experiment;
mod matrix_io;

pub use config::{
    parse_config, ConfigErrors, ConfigIssue, ExperimentConfig, ExperimentKind, ProblemConfig, ThresholdConfig,
    VerifyConfig,
};
pub use experiment::{
    bm_start, load_config, prepare, principal_angles, run_experiment, run_verify, thresholds_report, Outcome, Prepared,
    EXIT_DATA, EXIT_NOT_CONVERGED, EXIT_OK,
};
pub use matrix_io::{fmt_float, format_matrix, parse_matrix, read_matrix, write_matrix};
