use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TensorError {
    #[error("tensor is singular (det = {det:e})")]
    SingularTensor { det: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("invalid growth: 1 + g must be positive (g = {g})")]
    InvalidGrowth { g: f64 },
    #[error("invalid material parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("non-positive Jacobian (det F = {det_f:e}, det Fe = {det_fe:e})")]
    NonPositiveJacobian { det_f: f64, det_fe: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("periodic pairing failed for {} node(s) along {axis}: {nodes:?}", nodes.len())]
    PairingFailure { axis: char, nodes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    #[error("cell {cell}: non-positive Jacobian (det F = {det_f:e}, det Fe = {det_fe:e})")]
    NonPositiveJacobian { cell: usize, det_f: f64, det_fe: f64 },
    #[error("cell {cell}: {source}")]
    Material { cell: usize, source: MaterialError },
    #[error("dof map: {0}")]
    DofMap(String),
}

impl FemError {
    pub(crate) fn from_material(cell: usize, e: MaterialError) -> FemError {
        match e {
            MaterialError::NonPositiveJacobian { det_f, det_fe } => {
                FemError::NonPositiveJacobian { cell, det_f, det_fe }
            }
            other => FemError::Material { cell, source: other },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no dominant Fourier mode (peak {peak:e} < 3 x median {median:e})")]
    NoDominantMode { peak: f64, median: f64 },
    #[error("sample point ({x}, {y}) is not on the top surface")]
    PointOutsideSurface { x: f64, y: f64 },
    #[error("too few samples for spectral analysis ({0})")]
    TooFewSamples(usize),
}
