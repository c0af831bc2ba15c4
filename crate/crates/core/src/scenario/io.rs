//! Scenario-set and forecast files (structured text, TOML).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ForecastSeries, ScenarioSet};
use crate::CoreError;

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<ScenarioSet, CoreError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let set: ScenarioSet = toml::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    set.check(None)?;
    Ok(set)
}

pub fn save_scenarios(set: &ScenarioSet, path: impl AsRef<Path>) -> Result<(), CoreError> {
    let path = path.as_ref();
    let text = toml::to_string_pretty(set).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ForecastFile {
    forecast: BTreeMap<String, Vec<f64>>,
}

/// Reads per-farm forecast windspeed curves from a TOML table
/// `[forecast] <farm id> = [v_f(1), ...]`.
pub fn load_forecasts(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<String, ForecastSeries>, CoreError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: ForecastFile = toml::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    for (farm, speeds) in &file.forecast {
        if speeds.iter().any(|&v| !(v >= 0.0)) {
            return Err(CoreError::Invalid(format!(
                "forecast for {farm} has negative speeds"
            )));
        }
    }
    Ok(file
        .forecast
        .into_iter()
        .map(|(farm, speeds)| (farm, ForecastSeries { speeds }))
        .collect())
}
