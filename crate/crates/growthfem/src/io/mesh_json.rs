//! Native mesh file: `{"nodes": [[x, y, z], ...], "cells": [[10 ids], ...], "regions": ["film" | "substrate", ...]}`.
//! Facet sets and bounds are rebuilt on load.

use std::path::Path;

use growthfem_core::mesh::{Mesh, Region};
use growthfem_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::IoError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    pub nodes: Vec<Vec3>,
    pub cells: Vec<[usize; 10]>,
    pub regions: Vec<Region>,
}

impl From<&Mesh> for MeshDocument {
    fn from(m: &Mesh) -> Self {
        MeshDocument { nodes: m.nodes.clone(), cells: m.cells.clone(), regions: m.regions.clone() }
    }
}

pub fn mesh_to_json(mesh: &Mesh) -> String {
    serde_json::to_string(&MeshDocument::from(mesh)).expect("mesh serializes")
}

pub fn mesh_from_json(text: &str) -> Result<Mesh, String> {
    let doc: MeshDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Mesh::from_parts(doc.nodes, doc.cells, doc.regions).map_err(|e| e.to_string())
}

pub fn write_mesh_json(path: &Path, mesh: &Mesh) -> Result<(), IoError> {
    std::fs::write(path, mesh_to_json(mesh)).map_err(|e| IoError::io(path, e))
}

pub fn read_mesh_json(path: &Path) -> Result<Mesh, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    mesh_from_json(&text).map_err(|m| IoError::format(path, m))
}
