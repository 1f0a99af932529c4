//! Experiment runner for the Fourier-ratio toolkit.
//!
//! Versioned JSON configs select one of the named scenarios; each scenario
//! produces [`ScanResult`] tables written as CSV, a JSON summary and a
//! log₂-log₂ SVG plot.  [`acceptance`] runs the full acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod plot;
pub mod scan;
pub mod scenarios;

pub use acceptance::{run_acceptance_suite, AcceptanceSummary, CriterionResult};
pub use config::{Experiment, ExperimentConfig};
pub use error::{Error, Result};
pub use scan::{Band, ScanResult};
pub use scenarios::{run_config, run_experiment, validate_config, RunSummary};
