//! Configuration, scenario registry and experiment drivers behind the CLI.

pub mod check;
pub mod config;
pub mod io;
pub mod run;
pub mod scenarios;
pub mod study;

pub use check::{check_fields, BoundarySource, CheckRequest};
pub use config::{parse_config, parse_config_str, CheckName, CheckSpec, RunConfig};
pub use run::{run_scenario, ExitStatus, RunOutcome, OUTPUT_DIR_ENV};
pub use study::{convergence_study, study_errors, StudyResult, StudyRow};
