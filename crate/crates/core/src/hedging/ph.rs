//! Progressive-hedging machinery: per-scenario subproblems, multiplier
//! updates, inconsistency tracking, termination, enumeration of the
//! remaining inconsistent commitments, and fixed-commitment evaluation.

use std::time::Instant;

use ies_solver::{branch_and_bound, SolveStatus, SolverOptions};
use rayon::prelude::*;

use super::{PhIterationRecord, PhOptions};
use crate::model::{
    build_model, cost_breakdown, BuildOptions, CostBreakdown, DecisionCatalog, FlowDirectionMap,
    ModelInstance,
};
use crate::network::IesNetwork;
use crate::scenario::ScenarioSet;
use crate::CoreError;

/// Per-scenario subproblems sharing the commitment column layout. Each model
/// prices its scenario's own cost (probability one), per the decomposed
/// subproblem objective.
pub struct ScenarioModels {
    pub models: Vec<ModelInstance>,
    pub probabilities: Vec<f64>,
    /// Base objective coefficients of the commitment columns (identical
    /// across scenarios).
    pub commit_cost: Vec<f64>,
    pub n_commit: usize,
}

impl ScenarioModels {
    pub fn build(
        net: &IesNetwork,
        scenarios: &ScenarioSet,
        dirs: &FlowDirectionMap,
        build: &BuildOptions,
    ) -> Result<Self, CoreError> {
        let mut models = Vec::with_capacity(scenarios.len());
        for sc in 0..scenarios.len() {
            let single = scenarios.single(sc);
            let sliced = dirs.slice_scenario(sc);
            models.push(build_model(net, &single, Some(&sliced), build)?);
        }
        let n_commit = models[0].catalog.n_commit();
        let commit_cost = models[0].program.objective[..n_commit].to_vec();
        Ok(Self {
            models,
            probabilities: scenarios.probabilities(),
            commit_cost,
            n_commit,
        })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn catalog(&self) -> &DecisionCatalog {
        &self.models[0].catalog
    }
}

/// Progressive-hedging iteration state.
#[derive(Debug, Clone)]
pub struct PhState {
    pub iteration: usize,
    /// Per-scenario multipliers, one entry per commitment column.
    pub multipliers: Vec<Vec<f64>>,
    /// Per-scenario commitments from the latest solves.
    pub commitments: Vec<Vec<f64>>,
    /// Probability-weighted average commitment.
    pub avg_commitment: Vec<f64>,
    /// Average commitment after initialization, kept for the multiplier
    /// drift audit.
    pub initial_avg: Vec<f64>,
    pub inconsistency: usize,
    pub trace: Vec<PhIterationRecord>,
    /// kappa per commitment element.
    pub kappa: Vec<f64>,
    /// Latest per-scenario dispatch values.
    pub scenario_values: Vec<Vec<f64>>,
}

fn inconsistency_count(avg: &[f64], tol: f64) -> usize {
    avg.iter()
        .filter(|&&v| v.min(1.0 - v) > tol)
        .count()
}

fn weighted_average(commitments: &[Vec<f64>], probs: &[f64], n: usize) -> Vec<f64> {
    let mut avg = vec![0.0; n];
    for (c, &p) in commitments.iter().zip(probs) {
        for (a, &v) in avg.iter_mut().zip(c) {
            *a += p * v;
        }
    }
    avg
}

fn solve_subproblem(
    model: &ModelInstance,
    commit_obj: Option<(&[f64], f64)>,
    solver: &SolverOptions,
) -> Result<(Vec<f64>, f64), CoreError> {
    let mut program = model.program.clone();
    if let Some((coefs, constant)) = commit_obj {
        program.objective[..coefs.len()].copy_from_slice(coefs);
        program.objective_constant += constant;
    }
    let result = branch_and_bound(&program, solver)?;
    match result.status {
        SolveStatus::Optimal => {
            // the scenario's own cost, priced on the unmodified objective
            let base = model.program.objective_value(&result.values);
            Ok((result.values, base))
        }
        SolveStatus::Infeasible => Err(CoreError::Infeasible(
            "scenario subproblem infeasible: data error".into(),
        )),
        other => Err(CoreError::Invalid(format!(
            "scenario subproblem ended with status {other:?}"
        ))),
    }
}

fn run_parallel<T, F>(workers: usize, models: &[ModelInstance], f: F) -> Result<Vec<T>, CoreError>
where
    T: Send,
    F: Fn(usize, &ModelInstance) -> Result<T, CoreError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CoreError::Invalid(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        models
            .par_iter()
            .enumerate()
            .map(|(sc, m)| f(sc, m))
            .collect::<Result<Vec<T>, CoreError>>()
    })
}

fn extract_commitment(values: &[f64], n_commit: usize) -> Result<Vec<f64>, CoreError> {
    let mut c = Vec::with_capacity(n_commit);
    for &v in &values[..n_commit] {
        let r = v.round();
        if (v - r).abs() > 1e-4 || !(0.0..=1.0).contains(&r) {
            return Err(CoreError::Invalid(format!(
                "commitment value {v} is not binary"
            )));
        }
        c.push(r);
    }
    Ok(c)
}

/// Lines 1-6: solve every scenario independently, average the commitments,
/// seed the multipliers `rho = kappa (c_sc - avg)`.
pub fn ph_initialize(
    models: &ScenarioModels,
    opts: &PhOptions,
    solver: &SolverOptions,
) -> Result<PhState, CoreError> {
    let started = Instant::now();
    let outputs = run_parallel(opts.workers, &models.models, |_sc, m| {
        solve_subproblem(m, None, solver)
    })?;
    let n = models.n_commit;
    let kappa: Vec<f64> = models
        .commit_cost
        .iter()
        .map(|&c| opts.kappa_coeff * c)
        .collect();
    let mut commitments = Vec::with_capacity(outputs.len());
    let mut scenario_values = Vec::with_capacity(outputs.len());
    let mut objectives = Vec::with_capacity(outputs.len());
    for (values, obj) in outputs {
        commitments.push(extract_commitment(&values, n)?);
        scenario_values.push(values);
        objectives.push(obj);
    }
    let avg = weighted_average(&commitments, &models.probabilities, n);
    let multipliers: Vec<Vec<f64>> = commitments
        .iter()
        .map(|c| {
            c.iter()
                .zip(&avg)
                .zip(&kappa)
                .map(|((&ci, &ai), &ki)| ki * (ci - ai))
                .collect()
        })
        .collect();
    let inconsistency = inconsistency_count(&avg, opts.binary_tolerance);
    let trace = vec![PhIterationRecord {
        iteration: 0,
        inconsistency,
        scenario_objectives: objectives,
        avg_commitment: avg.clone(),
        wall: started.elapsed(),
    }];
    Ok(PhState {
        iteration: 0,
        multipliers,
        commitments,
        avg_commitment: avg.clone(),
        initial_avg: avg,
        inconsistency,
        trace,
        kappa,
        scenario_values,
    })
}

/// Penalized commitment coefficients for one scenario:
/// `base + rho + kappa (1/2 - avg)` per element, plus the constant
/// `sum kappa avg^2 / 2` (the c^2 -> c substitution keeps the model linear).
pub fn penalized_objective(
    base: &[f64],
    rho: &[f64],
    avg: &[f64],
    kappa: &[f64],
) -> (Vec<f64>, f64) {
    let coefs: Vec<f64> = base
        .iter()
        .zip(rho)
        .zip(avg)
        .zip(kappa)
        .map(|(((&b, &r), &a), &k)| b + r + k * (0.5 - a))
        .collect();
    let constant: f64 = avg
        .iter()
        .zip(kappa)
        .map(|(&a, &k)| 0.5 * k * a * a)
        .sum();
    (coefs, constant)
}

/// Lines 8-14: penalized parallel solves, multiplier update (with the
/// previous average, as printed; post-average behind the option), then the
/// new average and inconsistency count.
pub fn ph_iteration(
    state: &mut PhState,
    models: &ScenarioModels,
    opts: &PhOptions,
    solver: &SolverOptions,
) -> Result<(), CoreError> {
    let started = Instant::now();
    state.iteration += 1;
    let n = models.n_commit;
    let prev_avg = state.avg_commitment.clone();
    let outputs = run_parallel(opts.workers, &models.models, |sc, m| {
        let (coefs, constant) = penalized_objective(
            &models.commit_cost,
            &state.multipliers[sc],
            &prev_avg,
            &state.kappa,
        );
        solve_subproblem(m, Some((&coefs, constant)), solver)
    })?;
    let mut objectives = Vec::with_capacity(outputs.len());
    for (sc, (values, obj)) in outputs.into_iter().enumerate() {
        state.commitments[sc] = extract_commitment(&values, n)?;
        state.scenario_values[sc] = values;
        objectives.push(obj);
    }
    let new_avg = weighted_average(&state.commitments, &models.probabilities, n);
    let update_avg = if opts.post_average_update {
        &new_avg
    } else {
        &prev_avg
    };
    for (sc, rho) in state.multipliers.iter_mut().enumerate() {
        for e in 0..n {
            rho[e] += state.kappa[e] * (state.commitments[sc][e] - update_avg[e]);
        }
    }
    state.avg_commitment = new_avg;
    state.inconsistency = inconsistency_count(&state.avg_commitment, opts.binary_tolerance);
    audit_multiplier_drift(state, models, opts)?;
    state.trace.push(PhIterationRecord {
        iteration: state.iteration,
        inconsistency: state.inconsistency,
        scenario_objectives: objectives,
        avg_commitment: state.avg_commitment.clone(),
        wall: started.elapsed(),
    });
    Ok(())
}

/// Probability-weighted multiplier sum audit. The update rule as printed
/// uses the previous average, so the weighted sum telescopes to
/// `kappa (avg_now - avg_0)`; the post-average variant conserves it at zero.
fn audit_multiplier_drift(
    state: &PhState,
    models: &ScenarioModels,
    opts: &PhOptions,
) -> Result<(), CoreError> {
    let n = models.n_commit;
    for e in 0..n {
        let weighted: f64 = state
            .multipliers
            .iter()
            .zip(&models.probabilities)
            .map(|(rho, &p)| p * rho[e])
            .sum();
        let expected = if opts.post_average_update {
            0.0
        } else {
            state.kappa[e] * (state.avg_commitment[e] - state.initial_avg[e])
        };
        let scale = state.kappa[e].abs().max(1.0);
        if (weighted - expected).abs() > 1e-8 * scale {
            return Err(CoreError::Invalid(format!(
                "multiplier drift audit failed on element {e}: {weighted} vs {expected}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationCheck {
    Continue,
    Converged,
    IterationLimit,
}

pub fn check_termination(state: &PhState, opts: &PhOptions) -> TerminationCheck {
    if state.inconsistency <= opts.epsilon as usize {
        TerminationCheck::Converged
    } else if state.iteration >= opts.max_iterations {
        TerminationCheck::IterationLimit
    } else {
        TerminationCheck::Continue
    }
}

/// Fixed-commitment evaluation: every scenario solved as a continuous
/// program at the given commitment (the linking variables are gone, so the
/// solves are independent), expected cost probability-weighted.
pub struct FixedUcEvaluation {
    pub breakdown: CostBreakdown,
    pub scenario_values: Vec<Vec<f64>>,
    /// Probability-weighted model objective (commitment cost counted once),
    /// the case objective of the enumeration step.
    pub weighted_objective: f64,
}

pub fn evaluate_fixed_uc(
    commitment: &[f64],
    models: &ScenarioModels,
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    workers: usize,
    solver: &SolverOptions,
) -> Result<FixedUcEvaluation, CoreError> {
    let n = models.n_commit;
    if commitment.len() != n {
        return Err(CoreError::Invalid("commitment length mismatch".into()));
    }
    let outputs = run_parallel(workers, &models.models, |_sc, m| {
        let mut program = m.program.clone();
        for (e, &v) in commitment.iter().enumerate() {
            program.lower[e] = v;
            program.upper[e] = v;
            program.integer[e] = false;
        }
        let result = branch_and_bound(&program, solver)?;
        match result.status {
            SolveStatus::Optimal => Ok((result.values, result.objective)),
            SolveStatus::Infeasible => Err(CoreError::Infeasible(
                "fixed-commitment scenario infeasible; slack variables should prevent this \
                 (model bug)"
                    .into(),
            )),
            other => Err(CoreError::Invalid(format!(
                "fixed-commitment solve ended with status {other:?}"
            ))),
        }
    })?;
    let mut scenario_values = Vec::with_capacity(outputs.len());
    let mut weighted_objective = 0.0;
    for ((values, obj), &p) in outputs.into_iter().zip(&models.probabilities) {
        weighted_objective += p * obj;
        scenario_values.push(values);
    }
    let breakdown = combine_breakdowns(net, scenarios, models, &scenario_values);
    Ok(FixedUcEvaluation {
        breakdown,
        scenario_values,
        weighted_objective,
    })
}

/// Combines single-scenario cost breakdowns into the expected breakdown.
pub(crate) fn combine_breakdowns(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    models: &ScenarioModels,
    scenario_values: &[Vec<f64>],
) -> CostBreakdown {
    let mut out = CostBreakdown::default();
    for (sc, values) in scenario_values.iter().enumerate() {
        let single = scenarios.single(sc);
        let b = cost_breakdown(net, &single, &models.models[sc].catalog, values);
        let p = models.probabilities[sc];
        out.generation += p * b.generation;
        out.gas_side += p * b.gas_side;
        out.penalties += p * b.penalties;
        out.per_scenario.push(b.per_scenario[0]);
        out.expected_non_served_power += p * b.expected_non_served_power;
        out.max_non_served_power = out.max_non_served_power.max(b.max_non_served_power);
    }
    out.total = out.generation + out.gas_side + out.penalties;
    out
}

/// Lines 16-24: fix the consistent commitments at their agreed value,
/// enumerate every assignment of the inconsistent ones (lexicographically),
/// evaluate each case with all binaries fixed, and keep the cheapest.
///
/// Returns the winning commitment, its evaluation, and the number of cases
/// solved.
pub fn mph_enumerate(
    state: &PhState,
    models: &ScenarioModels,
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    opts: &PhOptions,
    solver: &SolverOptions,
) -> Result<(Vec<f64>, FixedUcEvaluation, usize), CoreError> {
    let n = models.n_commit;
    let inconsistent: Vec<usize> = (0..n)
        .filter(|&e| {
            let v = state.avg_commitment[e];
            v.min(1.0 - v) > opts.binary_tolerance
        })
        .collect();
    let cases = 1usize << inconsistent.len();
    let mut base: Vec<f64> = state
        .avg_commitment
        .iter()
        .map(|&v| v.round())
        .collect();
    let mut best: Option<(Vec<f64>, FixedUcEvaluation)> = None;
    for mask in 0..cases {
        // lexicographic order: first inconsistent element is the most
        // significant bit
        for (k, &e) in inconsistent.iter().enumerate() {
            let bit = (mask >> (inconsistent.len() - 1 - k)) & 1;
            base[e] = bit as f64;
        }
        let eval = evaluate_fixed_uc(&base, models, net, scenarios, opts.workers, solver)?;
        let better = match &best {
            None => true,
            Some((_, cur)) => eval.weighted_objective < cur.weighted_objective - 1e-12,
        };
        if better {
            best = Some((base.clone(), eval));
        }
    }
    let (commitment, eval) = best.expect("at least one case");
    Ok((commitment, eval, cases))
}
