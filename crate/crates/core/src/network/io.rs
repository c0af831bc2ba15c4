//! Network file ingestion and writing.
//!
//! The on-disk format is structured text (TOML); `docs/network-format.md`
//! documents the schema with the minimal fixture as the normative example.
//! Loading validates the network and fails with field-level messages on the
//! first violation set.

use std::path::Path;

use super::{validate, IesNetwork};
use crate::CoreError;

pub fn load_network(path: impl AsRef<Path>) -> Result<IesNetwork, CoreError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let net: IesNetwork = toml::from_str(&text).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let report = validate(&net);
    if !report.is_clean() {
        return Err(CoreError::Validation {
            path: path.display().to_string(),
            report,
        });
    }
    Ok(net)
}

pub fn save_network(net: &IesNetwork, path: impl AsRef<Path>) -> Result<(), CoreError> {
    let path = path.as_ref();
    let text = toml::to_string_pretty(net).map_err(|e| CoreError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
