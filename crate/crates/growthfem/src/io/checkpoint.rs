//! Resumable JSON checkpoints: nodal displacements, condensed element fields, growth level and
//! the accepted-step history.

use std::path::Path;

use growthfem_core::assembly::Model;
use growthfem_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::continuation::{AcceptedStep, ContinuationState};
use crate::error::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub g: f64,
    pub dt: f64,
    pub bifurcated: bool,
    /// Full nodal field, followers and prescribed nodes included.
    pub displacement: Vec<Vec3>,
    /// `[θ, p, λ̄, s]` per cell.
    pub mixed: Vec<[f64; 4]>,
    pub steps: Vec<AcceptedStep>,
}

impl Checkpoint {
    pub fn capture(model: &Model, state: &ContinuationState) -> Checkpoint {
        Checkpoint {
            g: state.g,
            dt: state.dt,
            bifurcated: state.bifurcated,
            displacement: model.dofs.expand(&state.free),
            mixed: state.mixed.clone(),
            steps: state.steps.clone(),
        }
    }

    pub fn restore(&self, model: &Model) -> Result<ContinuationState, String> {
        if self.displacement.len() != model.mesh.num_nodes() || self.mixed.len() != model.mesh.num_cells() {
            return Err(format!(
                "checkpoint holds {} nodes / {} cells, model has {} / {}",
                self.displacement.len(),
                self.mixed.len(),
                model.mesh.num_nodes(),
                model.mesh.num_cells()
            ));
        }
        Ok(ContinuationState {
            g: self.g,
            dt: self.dt,
            free: model.dofs.gather(&self.displacement),
            bifurcated: self.bifurcated,
            steps: self.steps.clone(),
            mixed: self.mixed.clone(),
        })
    }
}

pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), IoError> {
    let text = serde_json::to_string(checkpoint).map_err(|e| IoError::format(path, e.to_string()))?;
    std::fs::write(path, text).map_err(|e| IoError::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))
}
