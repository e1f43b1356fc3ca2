//! Seeded experiment runner for the faultsort algorithms.
//!
//! Trials are independent and reproducible: trial `i` of a run with master
//! seed `s` derives all of its randomness from seed `s ^ i`. Reports are written as CSV or JSON lines, and every
//! statistical experiment returns a list of checks against fixed bands.

pub mod config;
pub mod experiments;
pub mod oracle;
pub mod report;
pub mod stats;
pub mod trials;
pub mod urn;

pub use config::{Algorithm, ExperimentConfig, InputKind, OutputFormat};
pub use experiments::{Check, ExperimentSummary};
pub use oracle::{brute_force_oracle, OracleReport};
pub use report::{write_reports, TrialReport};
pub use trials::{run_trial, run_trials, SizeSummary, TrialSet};
