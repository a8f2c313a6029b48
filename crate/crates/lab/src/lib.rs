//! Laboratory around `elex-core`: file formats, ensemble convergence
//! studies with their reports, JSON-reportable checks, and the `elex`
//! command-line driver.

pub mod checks;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod stats;

pub use config::{ExperimentConfig, Process, SolverGrid};
pub use error::{Error, Result};
pub use harness::{emit_report, parse_report, run_convergence, run_convergence_x, run_convergence_z, ConvergenceReport};
