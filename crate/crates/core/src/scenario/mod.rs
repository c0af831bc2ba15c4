//! Wind scenario generation: ARMA(1,1) forecast-error paths, composition
//! with the forecast, k-means reduction to typical scenarios, and the power
//! curve mapping speeds to output.

mod arma;
mod io;
mod kmeans;
mod power_curve;

pub use arma::{compose_realized, simulate_error_paths, ComposedSpeeds};
pub use io::{load_forecasts, load_scenarios, save_scenarios};
pub use kmeans::reduce_kmeans;
pub use power_curve::speed_to_power;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::network::IesNetwork;
use crate::CoreError;

/// One farm's forecast windspeed curve (m/s, one entry per period).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastSeries {
    pub speeds: Vec<f64>,
}

/// ARMA(1,1) forecast-error model
/// `v_e(t) = alpha v_e(t-1) + beta xi(t-1) + xi(t)` with Gaussian noise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArmaParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ArmaParams {
    pub fn check(&self) -> Result<(), CoreError> {
        if !(self.alpha.abs() < 1.0) {
            return Err(CoreError::Invalid(format!(
                "ARMA stationarity requires |alpha| < 1, got {}",
                self.alpha
            )));
        }
        if !(self.sigma >= 0.0) {
            return Err(CoreError::Invalid("sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// A reduced wind scenario: occurrence probability plus per-farm hourly
/// power output (GW).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub probability: f64,
    pub power: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub horizon: usize,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.probability).collect()
    }

    /// Power injected by a farm in a scenario-period, zero for unknown farms.
    pub fn farm_power(&self, sc: usize, farm: &str, t: usize) -> f64 {
        self.scenarios[sc]
            .power
            .get(farm)
            .map(|curve| curve[t])
            .unwrap_or(0.0)
    }

    pub fn check(&self, net: Option<&IesNetwork>) -> Result<(), CoreError> {
        if self.scenarios.is_empty() {
            return Err(CoreError::Invalid("scenario set is empty".into()));
        }
        let total: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CoreError::Invalid(format!(
                "scenario probabilities sum to {total}, expected 1"
            )));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if !(s.probability > 0.0) {
                return Err(CoreError::Invalid(format!(
                    "scenario {i} has non-positive probability"
                )));
            }
            for (farm, curve) in &s.power {
                if curve.len() != self.horizon {
                    return Err(CoreError::Invalid(format!(
                        "scenario {i} farm {farm}: {} entries, expected {}",
                        curve.len(),
                        self.horizon
                    )));
                }
                if curve.iter().any(|&p| !(p >= 0.0)) {
                    return Err(CoreError::Invalid(format!(
                        "scenario {i} farm {farm}: negative power"
                    )));
                }
                if let Some(net) = net {
                    if let Some(f) = net.wind_farms.iter().find(|f| &f.id == farm) {
                        if curve.iter().any(|&p| p > f.capacity + 1e-9) {
                            return Err(CoreError::Invalid(format!(
                                "scenario {i} farm {farm}: power above rated capacity"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Probability-weighted mean power curve per farm, as a one-scenario set
    /// (the deterministic method's reference scenario).
    pub fn mean_scenario(&self) -> ScenarioSet {
        let mut mean: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for s in &self.scenarios {
            for (farm, curve) in &s.power {
                let acc = mean
                    .entry(farm.clone())
                    .or_insert_with(|| vec![0.0; self.horizon]);
                for (a, &p) in acc.iter_mut().zip(curve) {
                    *a += s.probability * p;
                }
            }
        }
        ScenarioSet {
            horizon: self.horizon,
            scenarios: vec![Scenario {
                probability: 1.0,
                power: mean,
            }],
        }
    }

    /// A one-scenario view of scenario `sc` with probability 1; progressive
    /// hedging subproblems price each scenario's own cost unweighted.
    pub fn single(&self, sc: usize) -> ScenarioSet {
        ScenarioSet {
            horizon: self.horizon,
            scenarios: vec![Scenario {
                probability: 1.0,
                power: self.scenarios[sc].power.clone(),
            }],
        }
    }
}

/// Inputs for the full generation pipeline.
#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub arma: ArmaParams,
    pub n_paths: usize,
    pub k: usize,
    /// When set, every farm reuses one error path per draw instead of an
    /// independent stream.
    pub shared_errors: bool,
}

/// Error paths -> realized speeds -> k-means reduction -> power mapping.
///
/// Farms get independent error streams derived from (seed, farm index)
/// unless `shared_errors` is set. Reduction runs on the concatenated
/// per-farm speed curves, then centroids are mapped through each farm's
/// power curve.
pub fn generate_scenarios(
    net: &IesNetwork,
    forecasts: &BTreeMap<String, ForecastSeries>,
    cfg: &GenerationConfig,
) -> Result<ScenarioSet, CoreError> {
    cfg.arma.check()?;
    if cfg.k > cfg.n_paths {
        return Err(CoreError::Invalid(format!(
            "k exceeds path count ({} > {})",
            cfg.k, cfg.n_paths
        )));
    }
    if net.wind_farms.is_empty() {
        return Err(CoreError::Invalid("network has no wind farms".into()));
    }
    let horizon = net.horizon;
    let mut farm_speeds: Vec<(usize, Vec<Vec<f64>>)> = Vec::new(); // farm idx -> paths
    for (fi, farm) in net.wind_farms.iter().enumerate() {
        let forecast = forecasts.get(&farm.id).ok_or_else(|| {
            CoreError::Invalid(format!("no forecast curve for wind farm {}", farm.id))
        })?;
        if forecast.speeds.len() != horizon {
            return Err(CoreError::Invalid(format!(
                "forecast for {} has {} entries, expected {horizon}",
                farm.id,
                forecast.speeds.len()
            )));
        }
        let params = ArmaParams {
            seed: if cfg.shared_errors {
                cfg.arma.seed
            } else {
                mix_seed(cfg.arma.seed, fi as u64)
            },
            ..cfg.arma
        };
        let errors = simulate_error_paths(&params, cfg.n_paths, horizon)?;
        let composed = compose_realized(forecast, &errors)?;
        farm_speeds.push((fi, composed.speeds));
    }
    // concatenate farm curves per path for the reduction
    let joined: Vec<Vec<f64>> = (0..cfg.n_paths)
        .map(|p| {
            let mut row = Vec::with_capacity(horizon * farm_speeds.len());
            for (_, paths) in &farm_speeds {
                row.extend_from_slice(&paths[p]);
            }
            row
        })
        .collect();
    let reduced = reduce_kmeans(&joined, cfg.k, cfg.arma.seed)?;
    let mut scenarios = Vec::with_capacity(reduced.len());
    for (probability, centroid) in reduced {
        let mut power = BTreeMap::new();
        for (slot, (fi, _)) in farm_speeds.iter().enumerate() {
            let farm = &net.wind_farms[*fi];
            let curve: Vec<f64> = centroid[slot * horizon..(slot + 1) * horizon]
                .iter()
                .map(|&v| speed_to_power(farm, v))
                .collect();
            power.insert(farm.id.clone(), curve);
        }
        scenarios.push(Scenario { probability, power });
    }
    let set = ScenarioSet { horizon, scenarios };
    set.check(Some(net))?;
    Ok(set)
}

/// splitmix64 step, used to derive independent per-farm seeds.
fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_set() -> ScenarioSet {
        let mut power = BTreeMap::new();
        power.insert("w1".to_string(), vec![0.5; 4]);
        let mut power2 = BTreeMap::new();
        power2.insert("w1".to_string(), vec![0.1; 4]);
        ScenarioSet {
            horizon: 4,
            scenarios: vec![
                Scenario {
                    probability: 0.75,
                    power,
                },
                Scenario {
                    probability: 0.25,
                    power: power2,
                },
            ],
        }
    }

    #[test]
    fn probability_sum_enforced() {
        let mut set = tiny_set();
        assert!(set.check(None).is_ok());
        set.scenarios[0].probability = 0.7;
        assert!(set.check(None).is_err());
    }

    #[test]
    fn mean_scenario_weights_probabilities() {
        let set = tiny_set();
        let mean = set.mean_scenario();
        assert_eq!(mean.len(), 1);
        let curve = &mean.scenarios[0].power["w1"];
        assert!((curve[0] - 0.4).abs() < 1e-12);
    }
}
