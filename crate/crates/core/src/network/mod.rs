//! Domain model of the coupled electricity-gas system.
//!
//! All quantities are kept in the canonical unit table: power in GW, energy
//! in GWh, gas flow in MSm3/h, gas stock in MSm3, pressure in bar, geometry
//! in m, money in M$, hourly steps with dt = 1 h so flows add directly to
//! stocks.

mod io;
mod physics;
mod validate;

pub use io::{load_network, save_network};
pub use physics::{compute_cont, linepack_coefficient};
pub use validate::{validate, ValidationIssue, ValidationReport};

use serde::{Deserialize, Serialize};

/// Scheduling horizon in hourly periods.
pub const HORIZON: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Gas,
    Coal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub kind: GeneratorKind,
    pub bus: String,
    /// Gas node the unit burns from; gas-fired only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas_node: Option<String>,
    /// Minimum stable output while committed (GW).
    #[serde(rename = "P_min")]
    pub min_output: f64,
    /// Maximum output (GW).
    #[serde(rename = "P_max")]
    pub max_output: f64,
    /// Hourly ramp-up limit (GW).
    #[serde(rename = "RU")]
    pub ramp_up: f64,
    /// Hourly ramp-down limit (GW).
    #[serde(rename = "RD")]
    pub ramp_down: f64,
    /// Production cost (M$/GW per hour).
    #[serde(rename = "C_PD")]
    pub production_cost: f64,
    /// Gas burned per unit of electric energy (MSm3/GWh); gas-fired only.
    #[serde(rename = "GTP", default, skip_serializing_if = "Option::is_none")]
    pub gas_to_power: Option<f64>,
    /// Commitment state before the first period.
    #[serde(rename = "c0", default)]
    pub initial_commitment: bool,
    /// Output before the first period (GW); defaults to the minimum output
    /// when committed, zero otherwise.
    #[serde(rename = "pd0", default, skip_serializing_if = "Option::is_none")]
    pub initial_output: Option<f64>,
}

impl Generator {
    /// Output level entering the ramp constraint of the first period.
    pub fn output_before_horizon(&self) -> f64 {
        match self.initial_output {
            Some(v) => v,
            None if self.initial_commitment => self.min_output,
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    /// Non-served power cost (M$/GWh).
    #[serde(rename = "C_NP")]
    pub non_served_cost: f64,
    /// Hourly demand (GW), one entry per period.
    #[serde(rename = "L_P")]
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub from: String,
    pub to: String,
    /// Reactance (p.u.).
    #[serde(rename = "X")]
    pub reactance: f64,
    /// Flow capacity (GW).
    #[serde(rename = "PF")]
    pub capacity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindFarm {
    pub id: String,
    pub bus: String,
    /// Rated capacity (GW).
    pub capacity: f64,
    /// Curtailment cost (M$/GW per hour).
    #[serde(rename = "C_WC")]
    pub curtailment_cost: f64,
    /// Power-curve parameters (m/s).
    pub v_cut_in: f64,
    pub v_rated: f64,
    pub v_cut_out: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasNode {
    pub id: String,
    /// Pressure bounds (bar).
    #[serde(rename = "Pi_min")]
    pub pressure_min: f64,
    #[serde(rename = "Pi_max")]
    pub pressure_max: f64,
    /// Non-served gas cost (M$/MSm3).
    #[serde(rename = "C_NG")]
    pub non_served_cost: f64,
    /// Pressure before the first period (bar).
    #[serde(rename = "pi0")]
    pub initial_pressure: f64,
    /// Hourly gas demand (MSm3/h), one entry per period.
    #[serde(rename = "L")]
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pipeline {
    pub from: String,
    pub to: String,
    /// Diameter (m).
    #[serde(rename = "D")]
    pub diameter: f64,
    /// Length (m).
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Compressor {
    pub from: String,
    pub to: String,
    /// Maximum downstream/upstream pressure ratio.
    #[serde(rename = "CM")]
    pub compression_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasWell {
    pub id: String,
    pub node: String,
    /// Production bounds (MSm3/h).
    #[serde(rename = "W_min")]
    pub min_production: f64,
    #[serde(rename = "W_max")]
    pub max_production: f64,
    /// Production cost (M$/MSm3).
    #[serde(rename = "C_PG")]
    pub production_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GasStorage {
    pub id: String,
    pub node: String,
    /// Level bounds (MSm3).
    #[serde(rename = "S_min")]
    pub level_min: f64,
    #[serde(rename = "S_max")]
    pub level_max: f64,
    /// Withdrawal limit (MSm3/h).
    #[serde(rename = "WR_max")]
    pub withdrawal_limit: f64,
    /// Injection limit (MSm3/h).
    #[serde(rename = "IS_max")]
    pub injection_limit: f64,
    /// Withdrawal cost (M$/MSm3).
    #[serde(rename = "C_S")]
    pub withdrawal_cost: f64,
    /// Level before the first period (MSm3).
    #[serde(rename = "sl0")]
    pub initial_level: f64,
}

/// Gas physical constants shared by the whole network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Gas density (kg/m3).
    pub rho: f64,
    /// Friction coefficient.
    #[serde(rename = "F")]
    pub friction: f64,
    /// Specific gas constant (m3*bar/(K*kg)).
    #[serde(rename = "R")]
    pub gas_constant: f64,
    /// System temperature (K).
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Average compressibility factor.
    #[serde(rename = "Z")]
    pub compressibility: f64,
}

/// The coupled power + gas system. Immutable after construction; shared
/// read-only across scenario workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IesNetwork {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub constants: PhysicalConstants,
    #[serde(rename = "bus", default)]
    pub buses: Vec<Bus>,
    #[serde(rename = "branch", default)]
    pub branches: Vec<Branch>,
    #[serde(rename = "generator", default)]
    pub generators: Vec<Generator>,
    #[serde(rename = "wind_farm", default)]
    pub wind_farms: Vec<WindFarm>,
    #[serde(rename = "gas_node", default)]
    pub gas_nodes: Vec<GasNode>,
    #[serde(rename = "pipeline", default)]
    pub pipelines: Vec<Pipeline>,
    #[serde(rename = "compressor", default)]
    pub compressors: Vec<Compressor>,
    #[serde(rename = "gas_well", default)]
    pub wells: Vec<GasWell>,
    #[serde(rename = "gas_storage", default)]
    pub storages: Vec<GasStorage>,
}

fn default_horizon() -> usize {
    HORIZON
}

impl IesNetwork {
    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn gas_node_index(&self, id: &str) -> Option<usize> {
        self.gas_nodes.iter().position(|n| n.id == id)
    }

    /// Linepack of a pipeline before the first period, from the endpoint
    /// initial pressures (MSm3).
    pub fn initial_linepack(&self, pipe: &Pipeline) -> f64 {
        let c = self
            .gas_node_index(&pipe.from)
            .map(|i| self.gas_nodes[i].initial_pressure)
            .unwrap_or(0.0);
        let d = self
            .gas_node_index(&pipe.to)
            .map(|i| self.gas_nodes[i].initial_pressure)
            .unwrap_or(0.0);
        linepack_coefficient(pipe, &self.constants) * 0.5 * (c + d)
    }
}
