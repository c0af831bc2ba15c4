//! Method entry points: the extensive-form benchmark, the deterministic
//! single-scenario baseline, and the traditional/modified progressive
//! hedging drivers.

use ies_solver::{branch_and_bound, SolveStatus};

use super::ph::{
    check_termination, evaluate_fixed_uc, mph_enumerate, ph_initialize, ph_iteration,
    ScenarioModels, TerminationCheck,
};
use super::{HedgingResult, MethodTag, RunOptions, Termination};
use crate::model::{build_model, determine_flow_directions};
use crate::network::IesNetwork;
use crate::scenario::ScenarioSet;
use crate::CoreError;

fn commitment_bits(commitment: &[f64]) -> Vec<u8> {
    commitment.iter().map(|&v| v.round() as u8).collect()
}

/// Method 1: the joint stochastic program over all scenarios with shared
/// commitment, solved by branch-and-bound to the configured gap.
pub fn solve_extensive(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &RunOptions,
) -> Result<HedgingResult, CoreError> {
    let dirs = determine_flow_directions(net, scenarios)?;
    let joint = build_model(net, scenarios, Some(&dirs), &opts.build)?;
    let result = branch_and_bound(&joint.program, &opts.solver)?;
    match result.status {
        SolveStatus::Optimal | SolveStatus::Limit if !result.values.is_empty() => {}
        SolveStatus::Infeasible => {
            return Err(CoreError::Infeasible("extensive form infeasible".into()))
        }
        other => {
            return Err(CoreError::Invalid(format!(
                "extensive form ended with status {other:?} and no incumbent"
            )))
        }
    }
    let n_commit = joint.catalog.n_commit();
    let commitment: Vec<f64> = result.values[..n_commit]
        .iter()
        .map(|&v| v.round())
        .collect();
    let models = ScenarioModels::build(net, scenarios, &dirs, &opts.build)?;
    let eval = evaluate_fixed_uc(
        &commitment,
        &models,
        net,
        scenarios,
        opts.ph.workers,
        &opts.solver,
    )?;
    Ok(HedgingResult {
        method: MethodTag::Extensive,
        termination: Termination::Direct,
        commitment: commitment_bits(&commitment),
        expected_cost: eval.breakdown.total,
        breakdown: eval.breakdown,
        scenario_values: eval.scenario_values,
        trace: Vec::new(),
        iterations: 0,
        enumeration_cases: 0,
        joint_objective: Some(result.objective),
        joint_bound: Some(result.best_bound),
    })
}

/// Method 2: commit against the probability-weighted mean wind curve, then
/// dispatch that commitment across the full scenario set.
pub fn solve_deterministic(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &RunOptions,
) -> Result<HedgingResult, CoreError> {
    let mean_set = scenarios.mean_scenario();
    let mean_dirs = determine_flow_directions(net, &mean_set)?;
    let mean_model = build_model(net, &mean_set, Some(&mean_dirs), &opts.build)?;
    let result = branch_and_bound(&mean_model.program, &opts.solver)?;
    if result.status != SolveStatus::Optimal {
        return Err(CoreError::Invalid(format!(
            "deterministic commitment stage ended with status {:?}",
            result.status
        )));
    }
    let n_commit = mean_model.catalog.n_commit();
    let commitment: Vec<f64> = result.values[..n_commit]
        .iter()
        .map(|&v| v.round())
        .collect();
    let dirs = determine_flow_directions(net, scenarios)?;
    let models = ScenarioModels::build(net, scenarios, &dirs, &opts.build)?;
    let eval = evaluate_fixed_uc(
        &commitment,
        &models,
        net,
        scenarios,
        opts.ph.workers,
        &opts.solver,
    )?;
    Ok(HedgingResult {
        method: MethodTag::Deterministic,
        termination: Termination::Direct,
        commitment: commitment_bits(&commitment),
        expected_cost: eval.breakdown.total,
        breakdown: eval.breakdown,
        scenario_values: eval.scenario_values,
        trace: Vec::new(),
        iterations: 0,
        enumeration_cases: 0,
        joint_objective: None,
        joint_bound: None,
    })
}

/// Method 4, traditional flavor: iterate until every averaged commitment is
/// binary (epsilon = 0).
pub fn solve_tph(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &RunOptions,
) -> Result<HedgingResult, CoreError> {
    let mut ph = opts.ph.clone();
    ph.epsilon = 0;
    run_progressive(net, scenarios, opts, ph, MethodTag::Tph)
}

/// Method 4, modified flavor: stop once at most epsilon (1 or 2) averaged
/// commitments stay fractional, then enumerate those.
pub fn solve_mph(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &RunOptions,
) -> Result<HedgingResult, CoreError> {
    let ph = opts.ph.clone();
    if !(1..=2).contains(&ph.epsilon) {
        return Err(CoreError::Invalid(format!(
            "modified progressive hedging needs epsilon in {{1,2}}, got {}",
            ph.epsilon
        )));
    }
    run_progressive(net, scenarios, opts, ph, MethodTag::Mph)
}

fn run_progressive(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &RunOptions,
    ph: super::PhOptions,
    method: MethodTag,
) -> Result<HedgingResult, CoreError> {
    let dirs = determine_flow_directions(net, scenarios)?;
    let models = ScenarioModels::build(net, scenarios, &dirs, &opts.build)?;
    let mut state = ph_initialize(&models, &ph, &opts.solver)?;
    let termination = loop {
        match check_termination(&state, &ph) {
            TerminationCheck::Converged => break Termination::Converged,
            TerminationCheck::IterationLimit => break Termination::IterationLimit,
            TerminationCheck::Continue => ph_iteration(&mut state, &models, &ph, &opts.solver)?,
        }
    };
    // enumeration resolves whatever inconsistency remains; with a consensus
    // (inconsistency 0) it degenerates to one evaluation of the agreed
    // commitment, which is also the traditional path's exit. An iteration-
    // capped run with widespread disagreement falls back to rounding the
    // average instead of enumerating.
    let (commitment, eval, cases) = if state.inconsistency <= (ph.epsilon as usize).max(2) {
        mph_enumerate(&state, &models, net, scenarios, &ph, &opts.solver)?
    } else {
        let rounded: Vec<f64> = state.avg_commitment.iter().map(|&v| v.round()).collect();
        let eval = evaluate_fixed_uc(&rounded, &models, net, scenarios, ph.workers, &opts.solver)?;
        (rounded, eval, 1)
    };
    Ok(HedgingResult {
        method,
        termination,
        commitment: commitment_bits(&commitment),
        expected_cost: eval.breakdown.total,
        breakdown: eval.breakdown,
        scenario_values: eval.scenario_values,
        trace: state.trace.clone(),
        iterations: state.iteration,
        enumeration_cases: cases,
        joint_objective: None,
        joint_bound: None,
    })
}
