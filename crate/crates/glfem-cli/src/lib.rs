//! Study orchestration for the Ginzburg-Landau FEM solver: configuration
//! parsing, convergence and stability studies, and CSV emission.
//!
//! Configuration comes from an optional flat `key = value` file plus
//! command-line flags that override it; data goes to the output file (or
//! standard output) and progress to standard error.

pub mod config;
pub mod report;
pub mod study;

pub use config::{ProblemKind, StudyConfig, StudyMode, TauRule};
pub use report::{ErrorReport, ReportRow};
pub use study::{run_convergence_study, run_stability_study};

use std::fmt;

/// Errors surfaced by the driver, each with a stable exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration (exit code 2).
    Config(String),
    /// A linear solve failed during a study (exit code 3).
    Solver {
        m: usize,
        step: usize,
        source: glfem_core::Error,
    },
    /// File output failed (exit code 4).
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Solver { m, step, source } => {
                write!(f, "solver failure at M = {m}, step {step}: {source}")
            }
            CliError::Io { path, source } => write!(f, "cannot write {path}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}
