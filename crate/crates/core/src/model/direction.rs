//! Gas flow direction determination.
//!
//! One relaxed solve of the full model — Weymouth cones and compensation
//! cuts omitted, binaries relaxed to [0,1], no pressure penalty — fixes the
//! flow orientation per (pipeline, period, scenario) from the sign of the
//! average flow. Near-zero flows default to the forward direction.

use ies_solver::{solve_lp, SolveStatus};

use super::builder::{build_model, BuildOptions};
use super::catalog::VarFamily;
use super::FlowDirectionMap;
use crate::network::IesNetwork;
use crate::scenario::ScenarioSet;
use crate::CoreError;

const ZERO_FLOW: f64 = 1e-6;

pub fn determine_flow_directions(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
) -> Result<FlowDirectionMap, CoreError> {
    let opts = BuildOptions {
        direction_relaxation: true,
        ..BuildOptions::default()
    };
    let model = build_model(net, scenarios, None, &opts)?;
    let result = solve_lp(&model.program)?;
    match result.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(CoreError::Infeasible(
                "direction relaxation infeasible: inconsistent network data".into(),
            ))
        }
        other => {
            return Err(CoreError::Invalid(format!(
                "direction relaxation ended with status {other:?}"
            )))
        }
    }
    let mut map = FlowDirectionMap::uniform(
        net.pipelines.len(),
        net.horizon,
        scenarios.len(),
        1,
    );
    for p in 0..net.pipelines.len() {
        for t in 0..net.horizon {
            for sc in 0..scenarios.len() {
                let gf = result.values[model.catalog.col(VarFamily::PipeFlowAvg, p, t, sc)];
                if gf < -ZERO_FLOW {
                    map.set(p, t, sc, -1);
                }
            }
        }
    }
    Ok(map)
}
