//! Per-case JSON summary.

use std::path::Path;

use growthfem_core::analysis::{BifurcationEvent, DetectorConfig};
use serde::{Deserialize, Serialize};

use crate::continuation::Outcome;
use crate::error::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mu_fiber: f64,
    pub g_cr1: Option<f64>,
    pub g_cr2: Option<f64>,
    /// Dominant wrinkle wavelength of the last accepted state.
    pub wavelength: Option<f64>,
    pub runtime_seconds: f64,
    pub outcome: Outcome,
    pub accepted_steps: usize,
    pub halvings: usize,
    pub events: Vec<BifurcationEvent>,
    /// Thresholds the events were detected with.
    pub detector: DetectorConfig,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| IoError::format(path, e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| IoError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))
}
