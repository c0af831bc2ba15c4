//! Stochastic day-ahead unit commitment for electricity-gas coupled systems.
//!
//! - [`network`]: domain types, file ingestion and validation
//! - [`scenario`]: wind-speed error simulation, scenario reduction, power curve
//! - [`model`]: the mixed-integer second-order-cone program builder
//! - [`hedging`]: progressive hedging (traditional and modified) plus the
//!   extensive-form and deterministic baselines

pub mod hedging;
pub mod model;
pub mod network;
pub mod scenario;

use network::ValidationReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path} failed validation:\n{report}")]
    Validation {
        path: String,
        report: ValidationReport,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver: {0}")]
    Solver(#[from] ies_solver::SolverError),
    #[error("{0}")]
    Infeasible(String),
}
