//! Second-order cone relaxation of the Weymouth equation.
//!
//! With the flow direction fixed, `gf |gf| = CONT^2 (pi_c^2 - pi_d^2)`
//! splits into a convex cone `gf^2 + CONT^2 pi_down^2 <= CONT^2 pi_up^2` and
//! a compensating linear inequality `gf >= CONT (pi_c - pi_d)` (mirrored for
//! reversed flow), with the pressure-difference penalty carried by the
//! objective.

use ies_solver::{AffineExpr, LinearRow, RowSense, SocRow};

use super::catalog::{DecisionCatalog, VarFamily};
use super::FlowDirectionMap;
use crate::network::{compute_cont, IesNetwork};
use crate::scenario::ScenarioSet;
use crate::CoreError;

/// Cone and cut rows for every (pipeline, period, scenario), following the
/// direction map.
pub fn relax_weymouth(
    net: &IesNetwork,
    scenarios: &ScenarioSet,
    dirs: &FlowDirectionMap,
    catalog: &DecisionCatalog,
) -> Result<(Vec<SocRow>, Vec<LinearRow>), CoreError> {
    let mut cones = Vec::new();
    let mut cuts = Vec::new();
    let horizon = net.horizon;
    let n_sc = scenarios.len();
    for (p, pipe) in net.pipelines.iter().enumerate() {
        let c = net
            .gas_node_index(&pipe.from)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.from)))?;
        let d = net
            .gas_node_index(&pipe.to)
            .ok_or_else(|| CoreError::Invalid(format!("unknown gas node {}", pipe.to)))?;
        let cont = compute_cont(pipe, &net.constants);
        for t in 0..horizon {
            for sc in 0..n_sc {
                let gf = catalog.col(VarFamily::PipeFlowAvg, p, t, sc);
                let pi_c = catalog.col(VarFamily::NodePressure, c, t, sc);
                let pi_d = catalog.col(VarFamily::NodePressure, d, t, sc);
                if dirs.sign(p, t, sc) >= 0 {
                    cones.push(SocRow {
                        members: vec![AffineExpr::var(gf, 1.0), AffineExpr::var(pi_d, cont)],
                        bound: AffineExpr::var(pi_c, cont),
                    });
                    // gf >= CONT (pi_c - pi_d)
                    cuts.push(LinearRow {
                        terms: vec![(gf, 1.0), (pi_c, -cont), (pi_d, cont)],
                        sense: RowSense::Ge,
                        rhs: 0.0,
                    });
                } else {
                    cones.push(SocRow {
                        members: vec![AffineExpr::var(gf, 1.0), AffineExpr::var(pi_c, cont)],
                        bound: AffineExpr::var(pi_d, cont),
                    });
                    // gf <= CONT (pi_c - pi_d)
                    cuts.push(LinearRow {
                        terms: vec![(gf, 1.0), (pi_c, -cont), (pi_d, cont)],
                        sense: RowSense::Le,
                        rhs: 0.0,
                    });
                }
            }
        }
    }
    Ok((cones, cuts))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 3-4-5 identity: gf = 3 with CONT pi = (5, 4) sits exactly on the
    /// cone and satisfies the linear cut.
    #[test]
    fn three_four_five_tightness() {
        let cont = 1.0;
        // cone: gf^2 + (cont pi_d)^2 <= (cont pi_c)^2
        let gf: f64 = 3.0;
        let pi_c: f64 = 5.0;
        let pi_d: f64 = 4.0;
        let lhs = gf * gf + (cont * pi_d).powi(2);
        let rhs = (cont * pi_c).powi(2);
        assert_eq!(lhs, rhs);
        // cut: gf >= cont (pi_c - pi_d)
        assert!(gf >= cont * (pi_c - pi_d));
        // and the original equation holds exactly at the tight point
        assert_eq!(gf * gf.abs(), cont * cont * (pi_c * pi_c - pi_d * pi_d));
    }

    #[test]
    fn equal_pressures_force_zero_flow() {
        // cone gives gf^2 <= 0 so gf = 0; the cut gives gf >= 0
        let cont: f64 = 2.0;
        let pi: f64 = 50.0;
        let max_gf_sq = (cont * pi).powi(2) - (cont * pi).powi(2);
        assert_eq!(max_gf_sq, 0.0);
        let cut_lower = cont * (pi - pi);
        assert_eq!(cut_lower, 0.0);
    }

    #[test]
    fn zero_flow_with_pressure_drop_violates_cut() {
        // gf = 0, pi_c > pi_d satisfies the cone but not eq23
        let cont: f64 = 1.5;
        let (gf, pi_c, pi_d): (f64, f64, f64) = (0.0, 6.0, 5.0);
        let cone_ok = gf * gf + (cont * pi_d).powi(2) <= (cont * pi_c).powi(2);
        assert!(cone_ok);
        let cut_ok = gf >= cont * (pi_c - pi_d);
        assert!(!cut_ok);
    }
}
