//! Decision-variable catalog: a deterministic column layout for every
//! variable family of the stochastic unit-commitment program.
//!
//! Commitment variables come first and carry no scenario index (they are the
//! scenario-independent variables); every per-scenario model built from the
//! same network therefore shares the commitment column layout.

use crate::network::IesNetwork;

/// Every variable family of the formulation. Each family except `Commit`
/// is indexed by (entity, period, scenario).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarFamily {
    /// c: binary unit commitment, scenario-independent.
    Commit,
    /// pdf: output above minimum while committed (the artificial variable of
    /// the commitment-cost substitution).
    OutputAboveMin,
    /// pg: well production.
    WellProduction,
    /// np: non-served power.
    NonServedPower,
    /// ng: non-served gas.
    NonServedGas,
    /// sto: storage withdrawal to the network.
    StorageWithdrawal,
    /// sti: storage injection from the network.
    StorageInjection,
    /// wc: wind curtailment.
    WindCurtailment,
    /// pf: branch power flow.
    LineFlow,
    /// theta: bus voltage angle.
    BusAngle,
    /// sl: storage level.
    StorageLevel,
    /// pi: gas node pressure.
    NodePressure,
    /// pibar: pipeline average pressure.
    PipeAvgPressure,
    /// m: pipeline linepack.
    Linepack,
    /// gfo: flow out of the pipeline at its receiving end.
    PipeFlowOut,
    /// gfi: flow into the pipeline at its sending end.
    PipeFlowIn,
    /// gf: average pipeline flow.
    PipeFlowAvg,
}

impl VarFamily {
    pub const ALL: [VarFamily; 17] = [
        VarFamily::Commit,
        VarFamily::OutputAboveMin,
        VarFamily::WellProduction,
        VarFamily::NonServedPower,
        VarFamily::NonServedGas,
        VarFamily::StorageWithdrawal,
        VarFamily::StorageInjection,
        VarFamily::WindCurtailment,
        VarFamily::LineFlow,
        VarFamily::BusAngle,
        VarFamily::StorageLevel,
        VarFamily::NodePressure,
        VarFamily::PipeAvgPressure,
        VarFamily::Linepack,
        VarFamily::PipeFlowOut,
        VarFamily::PipeFlowIn,
        VarFamily::PipeFlowAvg,
    ];

    /// Short symbol used in exports and dumps.
    pub fn symbol(&self) -> &'static str {
        match self {
            VarFamily::Commit => "c",
            VarFamily::OutputAboveMin => "pdf",
            VarFamily::WellProduction => "pg",
            VarFamily::NonServedPower => "np",
            VarFamily::NonServedGas => "ng",
            VarFamily::StorageWithdrawal => "sto",
            VarFamily::StorageInjection => "sti",
            VarFamily::WindCurtailment => "wc",
            VarFamily::LineFlow => "pf",
            VarFamily::BusAngle => "theta",
            VarFamily::StorageLevel => "sl",
            VarFamily::NodePressure => "pi",
            VarFamily::PipeAvgPressure => "pibar",
            VarFamily::Linepack => "m",
            VarFamily::PipeFlowOut => "gfo",
            VarFamily::PipeFlowIn => "gfi",
            VarFamily::PipeFlowAvg => "gf",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecisionCatalog {
    pub horizon: usize,
    pub n_scenarios: usize,
    pub n_units: usize,
    pub n_buses: usize,
    pub n_branches: usize,
    pub n_farms: usize,
    pub n_nodes: usize,
    pub n_pipes: usize,
    pub n_wells: usize,
    pub n_storages: usize,
    offsets: [usize; 17],
    total: usize,
}

impl DecisionCatalog {
    pub fn new(net: &IesNetwork, n_scenarios: usize) -> Self {
        let horizon = net.horizon;
        let counts = |family: VarFamily| -> usize {
            let entities = match family {
                VarFamily::Commit | VarFamily::OutputAboveMin => net.generators.len(),
                VarFamily::WellProduction => net.wells.len(),
                VarFamily::NonServedPower => net.buses.len(),
                VarFamily::NonServedGas | VarFamily::NodePressure => net.gas_nodes.len(),
                VarFamily::StorageWithdrawal
                | VarFamily::StorageInjection
                | VarFamily::StorageLevel => net.storages.len(),
                VarFamily::WindCurtailment => net.wind_farms.len(),
                VarFamily::LineFlow => net.branches.len(),
                VarFamily::BusAngle => net.buses.len(),
                VarFamily::PipeAvgPressure
                | VarFamily::Linepack
                | VarFamily::PipeFlowOut
                | VarFamily::PipeFlowIn
                | VarFamily::PipeFlowAvg => net.pipelines.len(),
            };
            let sc = if family == VarFamily::Commit {
                1
            } else {
                n_scenarios
            };
            entities * horizon * sc
        };
        let mut offsets = [0usize; 17];
        let mut total = 0;
        for (k, family) in VarFamily::ALL.iter().enumerate() {
            offsets[k] = total;
            total += counts(*family);
        }
        Self {
            horizon,
            n_scenarios,
            n_units: net.generators.len(),
            n_buses: net.buses.len(),
            n_branches: net.branches.len(),
            n_farms: net.wind_farms.len(),
            n_nodes: net.gas_nodes.len(),
            n_pipes: net.pipelines.len(),
            n_wells: net.wells.len(),
            n_storages: net.storages.len(),
            offsets,
            total,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.total
    }

    fn family_slot(family: VarFamily) -> usize {
        VarFamily::ALL
            .iter()
            .position(|f| *f == family)
            .expect("family in ALL")
    }

    pub fn col(&self, family: VarFamily, entity: usize, t: usize, sc: usize) -> usize {
        debug_assert!(t < self.horizon);
        let base = self.offsets[Self::family_slot(family)];
        if family == VarFamily::Commit {
            debug_assert!(sc == 0);
            base + entity * self.horizon + t
        } else {
            debug_assert!(sc < self.n_scenarios);
            base + (entity * self.horizon + t) * self.n_scenarios + sc
        }
    }

    pub fn commit(&self, unit: usize, t: usize) -> usize {
        self.col(VarFamily::Commit, unit, t, 0)
    }

    /// Number of commitment columns; they occupy `0..n_commit()`.
    pub fn n_commit(&self) -> usize {
        self.n_units * self.horizon
    }

    /// Decodes a column back to (family, entity, t, sc).
    pub fn decode(&self, col: usize) -> (VarFamily, usize, usize, usize) {
        let slot = (0..17)
            .rev()
            .find(|&k| self.offsets[k] <= col)
            .expect("column in range");
        let family = VarFamily::ALL[slot];
        let rel = col - self.offsets[slot];
        if family == VarFamily::Commit {
            (family, rel / self.horizon, rel % self.horizon, 0)
        } else {
            let sc = rel % self.n_scenarios;
            let et = rel / self.n_scenarios;
            (family, et / self.horizon, et % self.horizon, sc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::*;

    fn small_net() -> IesNetwork {
        IesNetwork {
            horizon: HORIZON,
            constants: PhysicalConstants {
                rho: 0.7,
                friction: 0.01,
                gas_constant: 0.06,
                temperature: 280.0,
                compressibility: 0.8,
            },
            buses: vec![
                Bus {
                    id: "b1".into(),
                    non_served_cost: 10.0,
                    demand: vec![0.5; HORIZON],
                },
                Bus {
                    id: "b2".into(),
                    non_served_cost: 10.0,
                    demand: vec![0.4; HORIZON],
                },
            ],
            branches: vec![Branch {
                from: "b1".into(),
                to: "b2".into(),
                reactance: 0.2,
                capacity: 1.0,
            }],
            generators: vec![Generator {
                id: "g1".into(),
                kind: GeneratorKind::Coal,
                bus: "b1".into(),
                gas_node: None,
                min_output: 0.1,
                max_output: 1.0,
                ramp_up: 1.0,
                ramp_down: 1.0,
                production_cost: 0.02,
                gas_to_power: None,
                initial_commitment: false,
                initial_output: None,
            }],
            wind_farms: vec![],
            gas_nodes: vec![GasNode {
                id: "n1".into(),
                pressure_min: 30.0,
                pressure_max: 70.0,
                non_served_cost: 5.0,
                initial_pressure: 50.0,
                demand: vec![0.0; HORIZON],
            }],
            pipelines: vec![],
            compressors: vec![],
            wells: vec![GasWell {
                id: "gw1".into(),
                node: "n1".into(),
                min_production: 0.0,
                max_production: 1.0,
                production_cost: 2.0,
            }],
            storages: vec![],
        }
    }

    #[test]
    fn every_tuple_maps_to_one_column() {
        let net = small_net();
        let cat = DecisionCatalog::new(&net, 3);
        let mut seen = vec![false; cat.num_cols()];
        let entities = |f: VarFamily| -> usize {
            match f {
                VarFamily::Commit | VarFamily::OutputAboveMin => cat.n_units,
                VarFamily::WellProduction => cat.n_wells,
                VarFamily::NonServedPower | VarFamily::BusAngle => cat.n_buses,
                VarFamily::NonServedGas | VarFamily::NodePressure => cat.n_nodes,
                VarFamily::StorageWithdrawal
                | VarFamily::StorageInjection
                | VarFamily::StorageLevel => cat.n_storages,
                VarFamily::WindCurtailment => cat.n_farms,
                VarFamily::LineFlow => cat.n_branches,
                _ => cat.n_pipes,
            }
        };
        for family in VarFamily::ALL {
            let scens = if family == VarFamily::Commit { 1 } else { 3 };
            for e in 0..entities(family) {
                for t in 0..cat.horizon {
                    for sc in 0..scens {
                        let col = cat.col(family, e, t, sc);
                        assert!(!seen[col], "column {col} hit twice");
                        seen[col] = true;
                        assert_eq!(cat.decode(col), (family, e, t, sc));
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "gaps in the catalog");
    }

    #[test]
    fn commit_columns_lead_and_share_layout_across_scenario_counts() {
        let net = small_net();
        let one = DecisionCatalog::new(&net, 1);
        let four = DecisionCatalog::new(&net, 4);
        for t in 0..net.horizon {
            assert_eq!(one.commit(0, t), four.commit(0, t));
            assert!(four.commit(0, t) < four.n_commit());
        }
    }
}
