//! Embedded mixed-integer conic solver.
//!
//! Linear programs are solved by a bounded revised simplex; second-order
//! cones are enforced by outer-approximation cuts; integrality by
//! branch-and-bound with best-bound node selection. Everything is
//! deterministic: identical inputs give bit-identical outputs.

mod backend;
mod branch_bound;
mod cones;
mod program;
mod simplex;

pub use backend::{
    read_program, read_solution, solve, write_program, write_solution, Backend, BackendRegistry,
};
pub use branch_bound::{
    branch_and_bound, solve_lp, BranchRule, NodeEvent, SolveResult, SolveStatus, SolverOptions,
};
pub use cones::separate_cone;
pub use program::{AffineExpr, ConicProgram, LinearRow, RowSense, SocRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unknown backend {requested:?}; available: {available}")]
    UnknownBackend { requested: String, available: String },
    #[error("exchange format error: {0}")]
    Exchange(String),
}
