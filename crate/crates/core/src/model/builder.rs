//! Assembles the mixed-integer conic program from a network and a scenario
//! set: bounds, objective (commitment-cost substitution plus the
//! pressure-difference penalty), power constraints, gas constraints,
//! linepack dynamics, and the Weymouth cone relaxation.

use ies_solver::{ConicProgram, RowSense};

use super::catalog::{DecisionCatalog, VarFamily};
use super::socr::relax_weymouth;
use super::{FlowDirectionMap, ModelInstance, RowTag};
use crate::network::{linepack_coefficient, GeneratorKind, IesNetwork};
use crate::scenario::ScenarioSet;
use crate::CoreError;

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Pressure-difference penalty weight; `None` picks the default
    /// 1e-3 x mean well production cost.
    pub gamma: Option<f64>,
    /// Terminal linepack sense: true for equality (default), false for >=.
    pub terminal_linepack_equality: bool,
    /// Skip cones, Weymouth cuts and the pressure penalty, and relax the
    /// binaries; used for the direction-determination run.
    pub direction_relaxation: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            gamma: None,
            terminal_linepack_equality: true,
            direction_relaxation: false,
        }
    }
}

pub fn default_gamma(net: &IesNetwork) -> f64 {
    let mean_cost =
        net.wells.iter().map(|w| w.production_cost).sum::<f64>() / net.wells.len().max(1) as f64;
    1e-3 * mean_cost
}

/// Objective coefficients per the expected-cost formulation: commitment
/// columns carry `C_PD * P_min` (scenario weights summing to one), every
/// other family is weighted by its scenario probability, and each directed
/// pipeline adds `gamma * (pi_up - pi_down)`.
pub fn build_objective(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    gamma: f64,
    dirs: Option<&FlowDirectionMap>,
    catalog: &DecisionCatalog,
) -> Result<Vec<f64>, CoreError> {
    let mut obj = vec![0.0; catalog.num_cols()];
    let horizon = net.horizon;
    let probs = scenarios.probabilities();
    for (i, g) in net.generators.iter().enumerate() {
        for t in 0..horizon {
            obj[catalog.commit(i, t)] = g.production_cost * g.min_output;
            for (sc, &p) in probs.iter().enumerate() {
                obj[catalog.col(VarFamily::OutputAboveMin, i, t, sc)] = p * g.production_cost;
            }
        }
    }
    for (sc, &p) in probs.iter().enumerate() {
        for t in 0..horizon {
            for (g, well) in net.wells.iter().enumerate() {
                obj[catalog.col(VarFamily::WellProduction, g, t, sc)] = p * well.production_cost;
            }
            for (s, st) in net.storages.iter().enumerate() {
                obj[catalog.col(VarFamily::StorageWithdrawal, s, t, sc)] =
                    p * st.withdrawal_cost;
            }
            for (l, bus) in net.buses.iter().enumerate() {
                obj[catalog.col(VarFamily::NonServedPower, l, t, sc)] = p * bus.non_served_cost;
            }
            for (n, node) in net.gas_nodes.iter().enumerate() {
                obj[catalog.col(VarFamily::NonServedGas, n, t, sc)] = p * node.non_served_cost;
            }
            for (w, farm) in net.wind_farms.iter().enumerate() {
                obj[catalog.col(VarFamily::WindCurtailment, w, t, sc)] =
                    p * farm.curtailment_cost;
            }
        }
    }
    if gamma != 0.0 {
        let dirs = dirs.ok_or_else(|| {
            CoreError::Invalid("pressure penalty requires a flow direction map".into())
        })?;
        for (pi, pipe) in net.pipelines.iter().enumerate() {
            let c = net
                .gas_node_index(&pipe.from)
                .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.from)))?;
            let d = net
                .gas_node_index(&pipe.to)
                .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.to)))?;
            for t in 0..horizon {
                for (sc, &p) in probs.iter().enumerate() {
                    let (up, down) = if dirs.sign(pi, t, sc) >= 0 { (c, d) } else { (d, c) };
                    obj[catalog.col(VarFamily::NodePressure, up, t, sc)] += p * gamma;
                    obj[catalog.col(VarFamily::NodePressure, down, t, sc)] -= p * gamma;
                }
            }
        }
    }
    Ok(obj)
}

struct Rows {
    program: ConicProgram,
    tags: Vec<RowTag>,
}

impl Rows {
    fn push(&mut self, tag: RowTag, terms: Vec<(usize, f64)>, sense: RowSense, rhs: f64) {
        self.program.add_row(terms, sense, rhs);
        self.tags.push(tag);
    }
}

/// Capacity coupling, ramping, DC flow and nodal power balance.
fn add_power_constraints(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    rows: &mut Rows,
) -> Result<(), CoreError> {
    let horizon = net.horizon;
    let n_sc = scenarios.len();
    for (i, g) in net.generators.iter().enumerate() {
        let span = g.max_output - g.min_output;
        for t in 0..horizon {
            for sc in 0..n_sc {
                // output above minimum only while committed
                rows.push(
                    RowTag::UnitCapacity,
                    vec![
                        (catalog.col(VarFamily::OutputAboveMin, i, t, sc), 1.0),
                        (catalog.commit(i, t), -span),
                    ],
                    RowSense::Le,
                    0.0,
                );
                // ramping on recovered output pd = c P_min + pdf
                let here = vec![
                    (catalog.commit(i, t), g.min_output),
                    (catalog.col(VarFamily::OutputAboveMin, i, t, sc), 1.0),
                ];
                if t == 0 {
                    let pd0 = g.output_before_horizon();
                    rows.push(RowTag::Ramp, here.clone(), RowSense::Le, g.ramp_up + pd0);
                    rows.push(
                        RowTag::Ramp,
                        here.into_iter().map(|(c, a)| (c, -a)).collect(),
                        RowSense::Le,
                        g.ramp_down - pd0,
                    );
                } else {
                    let mut up = here.clone();
                    up.push((catalog.commit(i, t - 1), -g.min_output));
                    up.push((catalog.col(VarFamily::OutputAboveMin, i, t - 1, sc), -1.0));
                    let down: Vec<_> = up.iter().map(|&(c, a)| (c, -a)).collect();
                    rows.push(RowTag::Ramp, up, RowSense::Le, g.ramp_up);
                    rows.push(RowTag::Ramp, down, RowSense::Le, g.ramp_down);
                }
            }
        }
    }
    // pf = (theta_a - theta_b) / X
    for (b, br) in net.branches.iter().enumerate() {
        let a = net
            .bus_index(&br.from)
            .ok_or_else(|| CoreError::Invalid(format!("unknown bus {}", br.from)))?;
        let bb = net
            .bus_index(&br.to)
            .ok_or_else(|| CoreError::Invalid(format!("unknown bus {}", br.to)))?;
        let inv_x = 1.0 / br.reactance;
        for t in 0..horizon {
            for sc in 0..n_sc {
                rows.push(
                    RowTag::DcFlow,
                    vec![
                        (catalog.col(VarFamily::LineFlow, b, t, sc), 1.0),
                        (catalog.col(VarFamily::BusAngle, a, t, sc), -inv_x),
                        (catalog.col(VarFamily::BusAngle, bb, t, sc), inv_x),
                    ],
                    RowSense::Eq,
                    0.0,
                );
            }
        }
    }
    // nodal balance: generation + wind - curtailment + inflow - outflow
    // + shed = demand
    for (l, bus) in net.buses.iter().enumerate() {
        for t in 0..horizon {
            for sc in 0..n_sc {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut rhs = bus.demand[t];
                for (i, g) in net.generators.iter().enumerate() {
                    if net.bus_index(&g.bus) == Some(l) {
                        terms.push((catalog.commit(i, t), g.min_output));
                        terms.push((catalog.col(VarFamily::OutputAboveMin, i, t, sc), 1.0));
                    }
                }
                for (w, farm) in net.wind_farms.iter().enumerate() {
                    if net.bus_index(&farm.bus) == Some(l) {
                        rhs -= scenarios.farm_power(sc, &farm.id, t);
                        terms.push((catalog.col(VarFamily::WindCurtailment, w, t, sc), -1.0));
                    }
                }
                for (b, br) in net.branches.iter().enumerate() {
                    if net.bus_index(&br.to) == Some(l) {
                        terms.push((catalog.col(VarFamily::LineFlow, b, t, sc), 1.0));
                    }
                    if net.bus_index(&br.from) == Some(l) {
                        terms.push((catalog.col(VarFamily::LineFlow, b, t, sc), -1.0));
                    }
                }
                terms.push((catalog.col(VarFamily::NonServedPower, l, t, sc), 1.0));
                rows.push(RowTag::PowerBalance, terms, RowSense::Eq, rhs);
            }
        }
    }
    Ok(())
}

/// Storage evolution, compressor coupling and nodal gas balance.
fn add_gas_constraints(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    rows: &mut Rows,
) -> Result<(), CoreError> {
    let horizon = net.horizon;
    let n_sc = scenarios.len();
    for (s, st) in net.storages.iter().enumerate() {
        for t in 0..horizon {
            for sc in 0..n_sc {
                // sl_t = sl_{t-1} + sti_t - sto_t
                let mut terms = vec![
                    (catalog.col(VarFamily::StorageLevel, s, t, sc), 1.0),
                    (catalog.col(VarFamily::StorageInjection, s, t, sc), -1.0),
                    (catalog.col(VarFamily::StorageWithdrawal, s, t, sc), 1.0),
                ];
                let rhs = if t == 0 {
                    st.initial_level
                } else {
                    terms.push((catalog.col(VarFamily::StorageLevel, s, t - 1, sc), -1.0));
                    0.0
                };
                rows.push(RowTag::StorageEvolution, terms, RowSense::Eq, rhs);
            }
        }
    }
    for comp in &net.compressors {
        let q = net
            .gas_node_index(&comp.from)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", comp.from)))?;
        let j = net
            .gas_node_index(&comp.to)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", comp.to)))?;
        for t in 0..horizon {
            for sc in 0..n_sc {
                // pi_q <= pi_j <= CM pi_q
                rows.push(
                    RowTag::Compressor,
                    vec![
                        (catalog.col(VarFamily::NodePressure, q, t, sc), 1.0),
                        (catalog.col(VarFamily::NodePressure, j, t, sc), -1.0),
                    ],
                    RowSense::Le,
                    0.0,
                );
                rows.push(
                    RowTag::Compressor,
                    vec![
                        (catalog.col(VarFamily::NodePressure, j, t, sc), 1.0),
                        (
                            catalog.col(VarFamily::NodePressure, q, t, sc),
                            -comp.compression_factor,
                        ),
                    ],
                    RowSense::Le,
                    0.0,
                );
            }
        }
    }
    // nodal balance: wells + storage net withdrawal + arriving flow
    // - leaving flow - gas burned by units + shed = demand
    for (n, node) in net.gas_nodes.iter().enumerate() {
        for t in 0..horizon {
            for sc in 0..n_sc {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for (g, well) in net.wells.iter().enumerate() {
                    if net.gas_node_index(&well.node) == Some(n) {
                        terms.push((catalog.col(VarFamily::WellProduction, g, t, sc), 1.0));
                    }
                }
                for (s, st) in net.storages.iter().enumerate() {
                    if net.gas_node_index(&st.node) == Some(n) {
                        terms.push((catalog.col(VarFamily::StorageWithdrawal, s, t, sc), 1.0));
                        terms.push((catalog.col(VarFamily::StorageInjection, s, t, sc), -1.0));
                    }
                }
                for (p, pipe) in net.pipelines.iter().enumerate() {
                    if net.gas_node_index(&pipe.to) == Some(n) {
                        terms.push((catalog.col(VarFamily::PipeFlowOut, p, t, sc), 1.0));
                    }
                    if net.gas_node_index(&pipe.from) == Some(n) {
                        terms.push((catalog.col(VarFamily::PipeFlowIn, p, t, sc), -1.0));
                    }
                }
                for (i, g) in net.generators.iter().enumerate() {
                    if g.kind == GeneratorKind::Gas {
                        let gnode = g.gas_node.as_deref().ok_or_else(|| {
                            CoreError::Invalid(format!(
                                "gas-fired generator {} has no gas node",
                                g.id
                            ))
                        })?;
                        if net.gas_node_index(gnode) == Some(n) {
                            let gtp = g.gas_to_power.ok_or_else(|| {
                                CoreError::Invalid(format!(
                                    "gas-fired generator {} has no GTP",
                                    g.id
                                ))
                            })?;
                            terms.push((catalog.commit(i, t), -gtp * g.min_output));
                            terms
                                .push((catalog.col(VarFamily::OutputAboveMin, i, t, sc), -gtp));
                        }
                    }
                }
                terms.push((catalog.col(VarFamily::NonServedGas, n, t, sc), 1.0));
                rows.push(RowTag::GasBalance, terms, RowSense::Eq, node.demand[t]);
            }
        }
    }
    Ok(())
}

/// Linepack mass law, average pressure and flow definitions, mass evolution,
/// and the terminal stock condition.
fn add_linepack_constraints(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    terminal_equality: bool,
    rows: &mut Rows,
) -> Result<(), CoreError> {
    let horizon = net.horizon;
    let n_sc = scenarios.len();
    let mut total_initial = 0.0;
    for (p, pipe) in net.pipelines.iter().enumerate() {
        let c = net
            .gas_node_index(&pipe.from)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.from)))?;
        let d = net
            .gas_node_index(&pipe.to)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.to)))?;
        let coef = linepack_coefficient(pipe, &net.constants);
        let m0 = net.initial_linepack(pipe);
        total_initial += m0;
        for t in 0..horizon {
            for sc in 0..n_sc {
                // pibar = (pi_c + pi_d)/2
                rows.push(
                    RowTag::AvgPressure,
                    vec![
                        (catalog.col(VarFamily::PipeAvgPressure, p, t, sc), 1.0),
                        (catalog.col(VarFamily::NodePressure, c, t, sc), -0.5),
                        (catalog.col(VarFamily::NodePressure, d, t, sc), -0.5),
                    ],
                    RowSense::Eq,
                    0.0,
                );
                // m = coef * pibar
                rows.push(
                    RowTag::LinepackMass,
                    vec![
                        (catalog.col(VarFamily::Linepack, p, t, sc), 1.0),
                        (catalog.col(VarFamily::PipeAvgPressure, p, t, sc), -coef),
                    ],
                    RowSense::Eq,
                    0.0,
                );
                // m_t = m_{t-1} + gfi_t - gfo_t
                let mut terms = vec![
                    (catalog.col(VarFamily::Linepack, p, t, sc), 1.0),
                    (catalog.col(VarFamily::PipeFlowIn, p, t, sc), -1.0),
                    (catalog.col(VarFamily::PipeFlowOut, p, t, sc), 1.0),
                ];
                let rhs = if t == 0 {
                    m0
                } else {
                    terms.push((catalog.col(VarFamily::Linepack, p, t - 1, sc), -1.0));
                    0.0
                };
                rows.push(RowTag::LinepackEvolution, terms, RowSense::Eq, rhs);
                // gf = (gfo + gfi)/2
                rows.push(
                    RowTag::AvgFlow,
                    vec![
                        (catalog.col(VarFamily::PipeFlowAvg, p, t, sc), 1.0),
                        (catalog.col(VarFamily::PipeFlowOut, p, t, sc), -0.5),
                        (catalog.col(VarFamily::PipeFlowIn, p, t, sc), -0.5),
                    ],
                    RowSense::Eq,
                    0.0,
                );
            }
        }
    }
    if !net.pipelines.is_empty() {
        for sc in 0..n_sc {
            let terms: Vec<(usize, f64)> = (0..net.pipelines.len())
                .map(|p| (catalog.col(VarFamily::Linepack, p, horizon - 1, sc), 1.0))
                .collect();
            let sense = if terminal_equality {
                RowSense::Eq
            } else {
                RowSense::Ge
            };
            rows.push(RowTag::TerminalLinepack, terms, sense, total_initial);
        }
    }
    Ok(())
}

fn set_bounds(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    catalog: &DecisionCatalog,
    relax_binaries: bool,
    program: &mut ConicProgram,
) {
    let horizon = net.horizon;
    let n_sc = scenarios.len();
    let inf = f64::INFINITY;
    // allocate all columns first (the catalog is the layout authority)
    for col in 0..catalog.num_cols() {
        let (family, e, t, sc) = catalog.decode(col);
        let name = if family == VarFamily::Commit {
            format!("{}[{},{}]", family.symbol(), e, t)
        } else {
            format!("{}[{},{},{}]", family.symbol(), e, t, sc)
        };
        let idx = program.add_named_col(name, 0.0, 0.0, false, 0.0);
        debug_assert_eq!(idx, col);
    }
    for (i, g) in net.generators.iter().enumerate() {
        for t in 0..horizon {
            let c = catalog.commit(i, t);
            program.lower[c] = 0.0;
            program.upper[c] = 1.0;
            program.integer[c] = !relax_binaries;
            for sc in 0..n_sc {
                let col = catalog.col(VarFamily::OutputAboveMin, i, t, sc);
                program.lower[col] = 0.0;
                program.upper[col] = g.max_output - g.min_output;
            }
        }
    }
    for t in 0..horizon {
        for sc in 0..n_sc {
            for (g, well) in net.wells.iter().enumerate() {
                let col = catalog.col(VarFamily::WellProduction, g, t, sc);
                program.lower[col] = well.min_production;
                program.upper[col] = well.max_production;
            }
            for (l, _) in net.buses.iter().enumerate() {
                let col = catalog.col(VarFamily::NonServedPower, l, t, sc);
                program.lower[col] = 0.0;
                program.upper[col] = inf;
                let th = catalog.col(VarFamily::BusAngle, l, t, sc);
                program.lower[th] = -inf;
                program.upper[th] = inf;
            }
            for (n, node) in net.gas_nodes.iter().enumerate() {
                let col = catalog.col(VarFamily::NonServedGas, n, t, sc);
                program.lower[col] = 0.0;
                program.upper[col] = inf;
                let pr = catalog.col(VarFamily::NodePressure, n, t, sc);
                program.lower[pr] = node.pressure_min;
                program.upper[pr] = node.pressure_max;
            }
            for (s, st) in net.storages.iter().enumerate() {
                let sto = catalog.col(VarFamily::StorageWithdrawal, s, t, sc);
                program.lower[sto] = 0.0;
                program.upper[sto] = st.withdrawal_limit;
                let sti = catalog.col(VarFamily::StorageInjection, s, t, sc);
                program.lower[sti] = 0.0;
                program.upper[sti] = st.injection_limit;
                let sl = catalog.col(VarFamily::StorageLevel, s, t, sc);
                program.lower[sl] = st.level_min;
                program.upper[sl] = st.level_max;
            }
            for (w, farm) in net.wind_farms.iter().enumerate() {
                let col = catalog.col(VarFamily::WindCurtailment, w, t, sc);
                program.lower[col] = 0.0;
                program.upper[col] = scenarios.farm_power(sc, &farm.id, t);
            }
            for (b, br) in net.branches.iter().enumerate() {
                let col = catalog.col(VarFamily::LineFlow, b, t, sc);
                program.lower[col] = -br.capacity;
                program.upper[col] = br.capacity;
            }
            for p in 0..net.pipelines.len() {
                let pb = catalog.col(VarFamily::PipeAvgPressure, p, t, sc);
                program.lower[pb] = 0.0;
                program.upper[pb] = inf;
                let m = catalog.col(VarFamily::Linepack, p, t, sc);
                program.lower[m] = 0.0;
                program.upper[m] = inf;
                for fam in [
                    VarFamily::PipeFlowOut,
                    VarFamily::PipeFlowIn,
                    VarFamily::PipeFlowAvg,
                ] {
                    let col = catalog.col(fam, p, t, sc);
                    program.lower[col] = -inf;
                    program.upper[col] = inf;
                }
            }
        }
    }
    // one reference bus per power island: lowest-index bus, angle fixed to 0
    for root in island_roots(net) {
        for t in 0..horizon {
            for sc in 0..n_sc {
                let col = catalog.col(VarFamily::BusAngle, root, t, sc);
                program.lower[col] = 0.0;
                program.upper[col] = 0.0;
            }
        }
    }
}

/// Lowest-index bus of each connected component of the power graph.
fn island_roots(net: &IesNetwork) -> Vec<usize> {
    let n = net.buses.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for br in &net.branches {
        if let (Some(a), Some(b)) = (net.bus_index(&br.from), net.bus_index(&br.to)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut roots = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        roots.push(start);
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    roots
}

/// Builds the full model for the given scenarios and direction map.
pub fn build_model(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    dirs: Option<&FlowDirectionMap>,
    opts: &BuildOptions,
) -> Result<ModelInstance, CoreError> {
    if scenarios.horizon != net.horizon {
        return Err(CoreError::Invalid(format!(
            "scenario horizon {} does not match the network horizon {}",
            scenarios.horizon, net.horizon
        )));
    }
    scenarios.check(Some(net))?;
    let catalog = DecisionCatalog::new(net, scenarios.len());
    let mut program = ConicProgram::new();
    set_bounds(
        net,
        scenarios,
        &catalog,
        opts.direction_relaxation,
        &mut program,
    );
    let gamma = if opts.direction_relaxation {
        0.0
    } else {
        opts.gamma.unwrap_or_else(|| default_gamma(net))
    };
    program.objective = build_objective(net, scenarios, gamma, dirs, &catalog)?;
    let mut rows = Rows {
        program,
        tags: Vec::new(),
    };
    add_power_constraints(net, scenarios, &catalog, &mut rows)?;
    add_gas_constraints(net, scenarios, &catalog, &mut rows)?;
    add_linepack_constraints(
        net,
        scenarios,
        &catalog,
        opts.terminal_linepack_equality,
        &mut rows,
    )?;
    let Rows {
        mut program,
        mut tags,
    } = rows;
    let mut soc_tags = Vec::new();
    if !opts.direction_relaxation {
        let dirs = dirs.ok_or_else(|| {
            CoreError::Invalid("full model requires a flow direction map".into())
        })?;
        let (cones, cuts) = relax_weymouth(net, scenarios, dirs, &catalog)?;
        for cut in cuts {
            program.add_row(cut.terms, cut.sense, cut.rhs);
            tags.push(RowTag::WeymouthCut);
        }
        for cone in cones {
            program.add_soc(cone.members, cone.bound);
            soc_tags.push(RowTag::Socr);
        }
    }
    let instance = ModelInstance {
        program,
        row_tags: tags,
        soc_tags,
        catalog,
    };
    instance.check()?;
    Ok(instance)
}
