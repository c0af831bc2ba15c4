//! Network validation: type invariants, referential integrity, connectivity.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{GeneratorKind, IesNetwork};

#[derive(Debug, Clone)]
pub struct ValidationIssue {
    /// Entity kind and id, e.g. "generator g2".
    pub entity: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

/// Empty iff the network satisfies every invariant.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, entity: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            entity: entity.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            writeln!(f, "network valid")
        } else {
            for issue in &self.issues {
                writeln!(f, "{issue}")?;
            }
            Ok(())
        }
    }
}

pub fn validate(net: &IesNetwork) -> ValidationReport {
    let mut report = ValidationReport::default();
    let horizon = net.horizon;

    if net.horizon != super::HORIZON {
        report.push("network", format!("horizon must be {}", super::HORIZON));
    }

    let mut bus_ids = HashSet::new();
    for bus in &net.buses {
        let who = format!("bus {}", bus.id);
        if !bus_ids.insert(bus.id.clone()) {
            report.push(&who, "duplicate id");
        }
        if bus.demand.len() != horizon {
            report.push(&who, format!("L_P must have {horizon} entries"));
        }
        if bus.demand.iter().any(|&d| !(d >= 0.0)) {
            report.push(&who, "L_P entries must be >= 0");
        }
        if !(bus.non_served_cost >= 0.0) {
            report.push(&who, "C_NP must be >= 0");
        }
    }

    let mut node_ids = HashSet::new();
    for node in &net.gas_nodes {
        let who = format!("gas node {}", node.id);
        if !node_ids.insert(node.id.clone()) {
            report.push(&who, "duplicate id");
        }
        if !(node.pressure_min > 0.0) {
            report.push(&who, "Pi_min must be > 0");
        }
        if node.pressure_min > node.pressure_max {
            report.push(&who, "Pi_min exceeds Pi_max");
        }
        if node.initial_pressure < node.pressure_min || node.initial_pressure > node.pressure_max {
            report.push(&who, "pi0 outside [Pi_min, Pi_max]");
        }
        if node.demand.len() != horizon {
            report.push(&who, format!("L must have {horizon} entries"));
        }
        if node.demand.iter().any(|&d| !(d >= 0.0)) {
            report.push(&who, "L entries must be >= 0");
        }
    }

    let mut gen_ids = HashSet::new();
    for g in &net.generators {
        let who = format!("generator {}", g.id);
        if !gen_ids.insert(g.id.clone()) {
            report.push(&who, "duplicate id");
        }
        if !(g.min_output >= 0.0) {
            report.push(&who, "P_min must be >= 0");
        }
        if g.min_output > g.max_output {
            report.push(&who, "P_min exceeds P_max");
        }
        if !(g.ramp_up >= 0.0 && g.ramp_down >= 0.0) {
            report.push(&who, "RU and RD must be >= 0");
        }
        if !bus_ids.contains(&g.bus) {
            report.push(&who, format!("unknown bus {}", g.bus));
        }
        match g.kind {
            GeneratorKind::Gas => {
                match &g.gas_node {
                    None => report.push(&who, "gas-fired unit needs a gas_node"),
                    Some(n) if !node_ids.contains(n) => {
                        report.push(&who, format!("unknown gas node {n}"))
                    }
                    Some(_) => {}
                }
                match g.gas_to_power {
                    None => report.push(&who, "gas-fired unit needs GTP"),
                    Some(v) if !(v > 0.0) => report.push(&who, "GTP must be > 0"),
                    Some(_) => {}
                }
            }
            GeneratorKind::Coal => {}
        }
        if let Some(pd0) = g.initial_output {
            let ok = pd0 == 0.0 || (pd0 >= g.min_output && pd0 <= g.max_output);
            if !ok {
                report.push(&who, "pd0 must be 0 or within [P_min, P_max]");
            }
        }
    }

    for (i, br) in net.branches.iter().enumerate() {
        let who = format!("branch {} ({} -> {})", i, br.from, br.to);
        if !(br.reactance > 0.0) {
            report.push(&who, "X must be > 0");
        }
        if !(br.capacity >= 0.0) {
            report.push(&who, "PF must be >= 0");
        }
        for end in [&br.from, &br.to] {
            if !bus_ids.contains(end) {
                report.push(&who, format!("unknown bus {end}"));
            }
        }
    }

    for w in &net.wind_farms {
        let who = format!("wind farm {}", w.id);
        if !(w.capacity >= 0.0) {
            report.push(&who, "capacity must be >= 0");
        }
        if !(w.v_cut_in > 0.0 && w.v_cut_in < w.v_rated && w.v_rated < w.v_cut_out) {
            report.push(&who, "need 0 < cut-in < rated < cut-out speeds");
        }
        if !bus_ids.contains(&w.bus) {
            report.push(&who, format!("unknown bus {}", w.bus));
        }
    }

    for (i, p) in net.pipelines.iter().enumerate() {
        let who = format!("pipeline {} ({} -> {})", i, p.from, p.to);
        if !(p.diameter > 0.0) {
            report.push(&who, "D must be > 0");
        }
        if !(p.length > 0.0) {
            report.push(&who, "L must be > 0");
        }
        for end in [&p.from, &p.to] {
            if !node_ids.contains(end) {
                report.push(&who, format!("unknown gas node {end}"));
            }
        }
    }

    for (i, c) in net.compressors.iter().enumerate() {
        let who = format!("compressor {} ({} -> {})", i, c.from, c.to);
        if !(c.compression_factor >= 1.0) {
            report.push(&who, "compression factor < 1");
        }
        for end in [&c.from, &c.to] {
            if !node_ids.contains(end) {
                report.push(&who, format!("unknown gas node {end}"));
            }
        }
    }

    let mut well_ids = HashSet::new();
    for w in &net.wells {
        let who = format!("gas well {}", w.id);
        if !well_ids.insert(w.id.clone()) {
            report.push(&who, "duplicate id");
        }
        if !(w.min_production >= 0.0) {
            report.push(&who, "W_min must be >= 0");
        }
        if w.min_production > w.max_production {
            report.push(&who, "W_min exceeds W_max");
        }
        if !node_ids.contains(&w.node) {
            report.push(&who, format!("unknown gas node {}", w.node));
        }
    }

    for s in &net.storages {
        let who = format!("gas storage {}", s.id);
        if !(s.level_min >= 0.0) {
            report.push(&who, "S_min must be >= 0");
        }
        if s.level_min > s.level_max {
            report.push(&who, "S_min exceeds S_max");
        }
        if s.initial_level < s.level_min || s.initial_level > s.level_max {
            report.push(&who, "sl0 outside [S_min, S_max]");
        }
        if !(s.withdrawal_limit >= 0.0 && s.injection_limit >= 0.0) {
            report.push(&who, "withdrawal/injection limits must be >= 0");
        }
        if !node_ids.contains(&s.node) {
            report.push(&who, format!("unknown gas node {}", s.node));
        }
    }

    let k = &net.constants;
    for (name, v) in [
        ("rho", k.rho),
        ("F", k.friction),
        ("R", k.gas_constant),
        ("T", k.temperature),
        ("Z", k.compressibility),
    ] {
        if !(v > 0.0) {
            report.push("constants", format!("{name} must be > 0"));
        }
    }

    if net.generators.is_empty() {
        report.push("network", "at least one generator required");
    }
    if net.wells.is_empty() {
        report.push("network", "at least one gas well required");
    }

    // connectivity of the power graph (buses + branches)
    if !net.buses.is_empty() {
        let edges: Vec<(String, String)> = net
            .branches
            .iter()
            .map(|b| (b.from.clone(), b.to.clone()))
            .collect();
        let ids: Vec<String> = net.buses.iter().map(|b| b.id.clone()).collect();
        if !connected(&ids, &edges) {
            report.push("network", "power graph not connected");
        }
    }
    // connectivity of the gas graph (nodes + pipelines + compressor arcs)
    if !net.gas_nodes.is_empty() {
        let mut edges: Vec<(String, String)> = net
            .pipelines
            .iter()
            .map(|p| (p.from.clone(), p.to.clone()))
            .collect();
        edges.extend(net.compressors.iter().map(|c| (c.from.clone(), c.to.clone())));
        let ids: Vec<String> = net.gas_nodes.iter().map(|n| n.id.clone()).collect();
        if !connected(&ids, &edges) {
            report.push("network", "gas graph not connected");
        }
    }

    report
}

fn connected(ids: &[String], edges: &[(String, String)]) -> bool {
    if ids.is_empty() {
        return true;
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for (a, b) in edges {
        if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; ids.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == ids.len()
}
