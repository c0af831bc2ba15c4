//! Post-solve audits: Weymouth relaxation residuals, conservation of power
//! and gas, storage telescoping, terminal linepack, and the cost breakdown
//! used in reports.

use super::catalog::{DecisionCatalog, VarFamily};
use crate::network::{compute_cont, IesNetwork};
use crate::scenario::ScenarioSet;

const DENOM_GUARD: f64 = 1e-12;

/// Relative Weymouth residuals of a feasible point of the relaxed model:
/// `|gf |gf| - CONT^2 (pi_c^2 - pi_d^2)| / max(CONT^2 Pi_max^2, eps)` per
/// (pipeline, period, scenario).
#[derive(Debug, Clone, Default)]
pub struct RelaxationAudit {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub count: usize,
}

pub fn audit_relaxation(
    net: &IesNetwork,
    catalog: &DecisionCatalog,
    values: &[f64],
) -> RelaxationAudit {
    let mut max_res: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0;
    for (p, pipe) in net.pipelines.iter().enumerate() {
        let Some(c) = net.gas_node_index(&pipe.from) else {
            continue;
        };
        let Some(d) = net.gas_node_index(&pipe.to) else {
            continue;
        };
        let cont = compute_cont(pipe, &net.constants);
        let pressure_cap = net.gas_nodes[c]
            .pressure_max
            .max(net.gas_nodes[d].pressure_max);
        let denom = (cont * cont * pressure_cap * pressure_cap).max(DENOM_GUARD);
        for t in 0..catalog.horizon {
            for sc in 0..catalog.n_scenarios {
                let gf = values[catalog.col(VarFamily::PipeFlowAvg, p, t, sc)];
                let pi_c = values[catalog.col(VarFamily::NodePressure, c, t, sc)];
                let pi_d = values[catalog.col(VarFamily::NodePressure, d, t, sc)];
                let residual =
                    (gf * gf.abs() - cont * cont * (pi_c * pi_c - pi_d * pi_d)).abs() / denom;
                max_res = max_res.max(residual);
                sum += residual;
                count += 1;
            }
        }
    }
    RelaxationAudit {
        max_residual: max_res,
        mean_residual: if count > 0 { sum / count as f64 } else { 0.0 },
        count,
    }
}

/// Conservation residuals of a solution, all absolute values.
#[derive(Debug, Clone, Default)]
pub struct ConservationAudit {
    /// Worst bus power-balance residual (GW).
    pub max_power_residual: f64,
    /// Worst gas-node balance residual (MSm3/h).
    pub max_gas_residual: f64,
    /// Worst storage telescoping defect sl_T - (sl_0 + sum(sti - sto)).
    pub max_storage_defect: f64,
    /// Terminal linepack defect per scenario: sum m_T - sum m_0 under the
    /// equality configuration, min(0, sum m_T - sum m_0) under >=.
    pub max_linepack_defect: f64,
}

pub fn audit_conservation(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    values: &[f64],
    terminal_equality: bool,
) -> ConservationAudit {
    let horizon = net.horizon;
    let n_sc = catalog.n_scenarios;
    let v = |f: VarFamily, e: usize, t: usize, sc: usize| values[catalog.col(f, e, t, sc)];
    let mut audit = ConservationAudit::default();

    for sc in 0..n_sc {
        for t in 0..horizon {
            for (l, bus) in net.buses.iter().enumerate() {
                let mut lhs = v(VarFamily::NonServedPower, l, t, sc);
                for (i, g) in net.generators.iter().enumerate() {
                    if net.bus_index(&g.bus) == Some(l) {
                        lhs += g.min_output * values[catalog.commit(i, t)]
                            + v(VarFamily::OutputAboveMin, i, t, sc);
                    }
                }
                for (w, farm) in net.wind_farms.iter().enumerate() {
                    if net.bus_index(&farm.bus) == Some(l) {
                        lhs += scenarios.farm_power(sc, &farm.id, t)
                            - v(VarFamily::WindCurtailment, w, t, sc);
                    }
                }
                for (b, br) in net.branches.iter().enumerate() {
                    if net.bus_index(&br.to) == Some(l) {
                        lhs += v(VarFamily::LineFlow, b, t, sc);
                    }
                    if net.bus_index(&br.from) == Some(l) {
                        lhs -= v(VarFamily::LineFlow, b, t, sc);
                    }
                }
                audit.max_power_residual =
                    audit.max_power_residual.max((lhs - bus.demand[t]).abs());
            }
            for (n, node) in net.gas_nodes.iter().enumerate() {
                let mut lhs = v(VarFamily::NonServedGas, n, t, sc);
                for (g, well) in net.wells.iter().enumerate() {
                    if net.gas_node_index(&well.node) == Some(n) {
                        lhs += v(VarFamily::WellProduction, g, t, sc);
                    }
                }
                for (s, st) in net.storages.iter().enumerate() {
                    if net.gas_node_index(&st.node) == Some(n) {
                        lhs += v(VarFamily::StorageWithdrawal, s, t, sc)
                            - v(VarFamily::StorageInjection, s, t, sc);
                    }
                }
                for (p, pipe) in net.pipelines.iter().enumerate() {
                    if net.gas_node_index(&pipe.to) == Some(n) {
                        lhs += v(VarFamily::PipeFlowOut, p, t, sc);
                    }
                    if net.gas_node_index(&pipe.from) == Some(n) {
                        lhs -= v(VarFamily::PipeFlowIn, p, t, sc);
                    }
                }
                for (i, g) in net.generators.iter().enumerate() {
                    if g.gas_node.as_deref().and_then(|id| net.gas_node_index(id)) == Some(n) {
                        let gtp = g.gas_to_power.unwrap_or(0.0);
                        lhs -= gtp
                            * (g.min_output * values[catalog.commit(i, t)]
                                + v(VarFamily::OutputAboveMin, i, t, sc));
                    }
                }
                audit.max_gas_residual =
                    audit.max_gas_residual.max((lhs - node.demand[t]).abs());
            }
        }
        for (s, st) in net.storages.iter().enumerate() {
            let mut level = st.initial_level;
            for t in 0..horizon {
                level += v(VarFamily::StorageInjection, s, t, sc)
                    - v(VarFamily::StorageWithdrawal, s, t, sc);
            }
            let defect = (v(VarFamily::StorageLevel, s, horizon - 1, sc) - level).abs();
            audit.max_storage_defect = audit.max_storage_defect.max(defect);
        }
        if !net.pipelines.is_empty() {
            let initial: f64 = net.pipelines.iter().map(|p| net.initial_linepack(p)).sum();
            let terminal: f64 = (0..net.pipelines.len())
                .map(|p| v(VarFamily::Linepack, p, horizon - 1, sc))
                .sum();
            let defect = if terminal_equality {
                (terminal - initial).abs()
            } else {
                (initial - terminal).max(0.0)
            };
            audit.max_linepack_defect = audit.max_linepack_defect.max(defect);
        }
    }
    audit
}

/// Expected cost split into the three objective groups: generation, gas-side
/// (wells + storage withdrawal), and penalties (non-served power/gas, wind
/// curtailment). The total is the sum of the three groups by construction.
#[derive(Debug, Clone, Default)]
pub struct CostBreakdown {
    pub generation: f64,
    pub gas_side: f64,
    pub penalties: f64,
    pub total: f64,
    /// Unweighted per-scenario totals.
    pub per_scenario: Vec<f64>,
    /// Probability-weighted total non-served power over the horizon (GWh).
    pub expected_non_served_power: f64,
    /// Worst per-scenario total non-served power (GWh).
    pub max_non_served_power: f64,
}

pub fn cost_breakdown(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    values: &[f64],
) -> CostBreakdown {
    let horizon = net.horizon;
    let v = |f: VarFamily, e: usize, t: usize, sc: usize| values[catalog.col(f, e, t, sc)];
    let mut out = CostBreakdown::default();
    for (sc, s) in scenarios.scenarios.iter().enumerate() {
        let mut generation = 0.0;
        let mut gas_side = 0.0;
        let mut penalties = 0.0;
        let mut shed = 0.0;
        for t in 0..horizon {
            for (i, g) in net.generators.iter().enumerate() {
                let pd = g.min_output * values[catalog.commit(i, t)]
                    + v(VarFamily::OutputAboveMin, i, t, sc);
                generation += g.production_cost * pd;
            }
            for (g, well) in net.wells.iter().enumerate() {
                gas_side += well.production_cost * v(VarFamily::WellProduction, g, t, sc);
            }
            for (st_i, st) in net.storages.iter().enumerate() {
                gas_side += st.withdrawal_cost * v(VarFamily::StorageWithdrawal, st_i, t, sc);
            }
            for (l, bus) in net.buses.iter().enumerate() {
                let np = v(VarFamily::NonServedPower, l, t, sc);
                penalties += bus.non_served_cost * np;
                shed += np;
            }
            for (n, node) in net.gas_nodes.iter().enumerate() {
                penalties += node.non_served_cost * v(VarFamily::NonServedGas, n, t, sc);
            }
            for (w, farm) in net.wind_farms.iter().enumerate() {
                penalties += farm.curtailment_cost * v(VarFamily::WindCurtailment, w, t, sc);
            }
        }
        out.generation += s.probability * generation;
        out.gas_side += s.probability * gas_side;
        out.penalties += s.probability * penalties;
        out.per_scenario.push(generation + gas_side + penalties);
        out.expected_non_served_power += s.probability * shed;
        out.max_non_served_power = out.max_non_served_power.max(shed);
    }
    out.total = out.generation + out.gas_side + out.penalties;
    out
}
