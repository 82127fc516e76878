//! Finite-element core for growth-driven wrinkling of fiber-reinforced bilayers.
//!
//! Everything here is `no_std` with `alloc`: tensor algebra, the growth/hyperelastic material
//! law, structured 10-node tetrahedral meshes with periodic pairing, the condensed T2P0F0
//! element, global assembly over a periodic dof map, surface perturbation loads, and the
//! post-processing used to detect bifurcations and measure wrinkle wavelengths.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod assembly;
pub mod element;
pub mod error;
pub mod material;
pub mod mesh;
pub mod perturbation;
pub mod tensor;

pub use error::{AnalysisError, FemError, MaterialError, MeshError, TensorError};
pub use tensor::{Tensor2, Tensor4, Vec3};
