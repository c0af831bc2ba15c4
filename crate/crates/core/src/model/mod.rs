//! The stochastic unit-commitment program: objective, power and gas
//! constraints, linepack dynamics, and the second-order cone relaxation of
//! the Weymouth equation.

pub mod audit;
mod builder;
mod catalog;
mod direction;
mod export;
mod socr;

pub use audit::{
    audit_conservation, audit_relaxation, cost_breakdown, ConservationAudit, CostBreakdown,
    RelaxationAudit,
};
pub use builder::{build_model, build_objective, default_gamma, BuildOptions};
pub use catalog::{DecisionCatalog, VarFamily};
pub use direction::determine_flow_directions;
pub use export::export_model;
pub use socr::relax_weymouth;

use std::fmt;

use ies_solver::ConicProgram;

/// Provenance of a model row: which equation of the formulation it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowTag {
    /// Capacity coupling of output-above-minimum to commitment.
    UnitCapacity,
    /// Ramp limits on recovered output.
    Ramp,
    /// DC flow definition pf = (theta_a - theta_b)/X.
    DcFlow,
    /// Bus power balance.
    PowerBalance,
    /// Storage level evolution.
    StorageEvolution,
    /// Compressor pressure coupling.
    Compressor,
    /// Linepack mass from average pressure.
    LinepackMass,
    /// Linepack evolution over time.
    LinepackEvolution,
    /// Average flow definition.
    AvgFlow,
    /// Average pressure definition.
    AvgPressure,
    /// Gas node balance.
    GasBalance,
    /// Terminal linepack condition.
    TerminalLinepack,
    /// Linear compensation cut of the cone relaxation.
    WeymouthCut,
    /// Second-order cone of the Weymouth relaxation.
    Socr,
}

impl RowTag {
    /// Equation id in the formulation.
    pub fn eq_id(&self) -> &'static str {
        match self {
            RowTag::UnitCapacity => "eq2",
            RowTag::Ramp => "eq3",
            RowTag::DcFlow => "eq4",
            RowTag::PowerBalance => "eq6",
            RowTag::StorageEvolution => "eq10",
            RowTag::Compressor => "eq11",
            RowTag::LinepackMass => "eq12",
            RowTag::LinepackEvolution => "eq13",
            RowTag::AvgFlow => "eq14",
            RowTag::AvgPressure => "pibar",
            RowTag::GasBalance => "eq17",
            RowTag::TerminalLinepack => "eq18",
            RowTag::WeymouthCut => "eq23",
            RowTag::Socr => "socr15",
        }
    }
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.eq_id())
    }
}

/// Gas flow orientation per (pipeline, period, scenario): +1 for sending to
/// receiving node, -1 for the reverse. Total by construction.
#[derive(Debug, Clone)]
pub struct FlowDirectionMap {
    n_pipes: usize,
    horizon: usize,
    n_scenarios: usize,
    signs: Vec<i8>,
}

impl FlowDirectionMap {
    pub fn uniform(n_pipes: usize, horizon: usize, n_scenarios: usize, sign: i8) -> Self {
        Self {
            n_pipes,
            horizon,
            n_scenarios,
            signs: vec![sign; n_pipes * horizon * n_scenarios],
        }
    }

    pub fn from_signs(
        n_pipes: usize,
        horizon: usize,
        n_scenarios: usize,
        signs: Vec<i8>,
    ) -> Self {
        assert_eq!(signs.len(), n_pipes * horizon * n_scenarios);
        Self {
            n_pipes,
            horizon,
            n_scenarios,
            signs,
        }
    }

    fn idx(&self, pipe: usize, t: usize, sc: usize) -> usize {
        debug_assert!(pipe < self.n_pipes && t < self.horizon && sc < self.n_scenarios);
        (pipe * self.horizon + t) * self.n_scenarios + sc
    }

    pub fn sign(&self, pipe: usize, t: usize, sc: usize) -> i8 {
        self.signs[self.idx(pipe, t, sc)]
    }

    pub fn set(&mut self, pipe: usize, t: usize, sc: usize, sign: i8) {
        let i = self.idx(pipe, t, sc);
        self.signs[i] = sign;
    }

    /// The single-scenario slice used by a per-scenario subproblem.
    pub fn slice_scenario(&self, sc: usize) -> FlowDirectionMap {
        let mut signs = Vec::with_capacity(self.n_pipes * self.horizon);
        for pipe in 0..self.n_pipes {
            for t in 0..self.horizon {
                signs.push(self.sign(pipe, t, sc));
            }
        }
        FlowDirectionMap {
            n_pipes: self.n_pipes,
            horizon: self.horizon,
            n_scenarios: 1,
            signs,
        }
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }
}

/// A built optimization model: the conic program plus the provenance tag of
/// every row and the catalog that maps columns back to decisions.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub program: ConicProgram,
    pub row_tags: Vec<RowTag>,
    pub soc_tags: Vec<RowTag>,
    pub catalog: DecisionCatalog,
}

impl ModelInstance {
    /// Structural consistency: tag per row, catalog-sized columns, cones with
    /// at least two participants.
    pub fn check(&self) -> Result<(), crate::CoreError> {
        if self.program.num_cols() != self.catalog.num_cols() {
            return Err(crate::CoreError::Invalid(format!(
                "program has {} columns, catalog {}",
                self.program.num_cols(),
                self.catalog.num_cols()
            )));
        }
        if self.program.rows.len() != self.row_tags.len() {
            return Err(crate::CoreError::Invalid(
                "row/tag count mismatch".into(),
            ));
        }
        if self.program.soc_rows.len() != self.soc_tags.len() {
            return Err(crate::CoreError::Invalid(
                "cone/tag count mismatch".into(),
            ));
        }
        self.program.validate()?;
        Ok(())
    }
}
