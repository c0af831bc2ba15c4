//! Scenario decomposition by progressive hedging, plus the extensive-form
//! benchmark and the deterministic (mean-wind) baseline.

mod methods;
mod ph;
mod trace;

pub use methods::{solve_deterministic, solve_extensive, solve_mph, solve_tph};
pub use ph::{
    check_termination, evaluate_fixed_uc, mph_enumerate, penalized_objective, ph_initialize,
    ph_iteration, FixedUcEvaluation, PhState, ScenarioModels, TerminationCheck,
};
pub use trace::write_trace;

use std::time::Duration;

use ies_solver::SolverOptions;

use crate::model::CostBreakdown;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Extensive,
    Deterministic,
    Tph,
    Mph,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Extensive => "extensive",
            MethodTag::Deterministic => "deterministic",
            MethodTag::Tph => "tph",
            MethodTag::Mph => "mph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Inconsistency dropped to the threshold.
    Converged,
    /// The iteration cap stopped the loop.
    IterationLimit,
    /// Single solve, no hedging loop (extensive / deterministic).
    Direct,
}

#[derive(Debug, Clone)]
pub struct PhOptions {
    /// Multiplier rule coefficient; kappa per commitment element is
    /// `coeff * C_PD * P_min`.
    pub kappa_coeff: f64,
    /// Termination threshold on the inconsistency count: 0 for TPH, 1 or 2
    /// for MPH.
    pub epsilon: u8,
    pub max_iterations: usize,
    /// An averaged commitment entry counts as inconsistent when farther than
    /// this from both 0 and 1.
    pub binary_tolerance: f64,
    pub workers: usize,
    /// Update multipliers with the freshly recomputed average instead of the
    /// previous iteration's (off reproduces the printed algorithm).
    pub post_average_update: bool,
}

impl Default for PhOptions {
    fn default() -> Self {
        Self {
            kappa_coeff: 1.0,
            epsilon: 0,
            max_iterations: 150,
            binary_tolerance: 1e-4,
            workers: default_workers(),
            post_average_update: false,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// One line of the hedging convergence trace.
#[derive(Debug, Clone)]
pub struct PhIterationRecord {
    pub iteration: usize,
    pub inconsistency: usize,
    /// Each scenario's own-cost objective at its current solution.
    pub scenario_objectives: Vec<f64>,
    pub avg_commitment: Vec<f64>,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct HedgingResult {
    pub method: MethodTag,
    pub termination: Termination,
    /// Scenario-independent commitment, unit-major by period.
    pub commitment: Vec<u8>,
    /// Expected cost of the commitment over the scenario set (objective
    /// groups, no penalty terms).
    pub expected_cost: f64,
    pub breakdown: CostBreakdown,
    /// Per-scenario dispatch: values over the single-scenario catalog.
    pub scenario_values: Vec<Vec<f64>>,
    pub trace: Vec<PhIterationRecord>,
    /// Progressive-hedging iterations run (0 for direct methods).
    pub iterations: usize,
    /// Enumeration cases solved by the modified algorithm.
    pub enumeration_cases: usize,
    /// Solver objective of the joint model (extensive form only; includes
    /// the pressure penalty).
    pub joint_objective: Option<f64>,
    pub joint_bound: Option<f64>,
}

/// Options shared by every method entry point.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub build: crate::model::BuildOptions,
    pub solver: SolverOptions,
    pub ph: PhOptions,
}
