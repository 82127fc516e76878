#![allow(dead_code)]

use growthfem::config::{GeometryConfig, RunConfig};
use growthfem::continuation::Monitor;
use growthfem_core::assembly::{Constraints, Model};
use growthfem_core::mesh::build_bilayer_box;

/// Short periodic strip: 768 cells, a few seconds per hundred steps.
pub fn small_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.geometry = GeometryConfig { ly: 4.0, ny: 8, ..GeometryConfig::default() };
    cfg.growth.g_max = 0.001;
    cfg.study.mu_fibers = vec![250.0];
    cfg.outputs.vtu_every_n_steps = 0;
    cfg.outputs.checkpoint_every_g = None;
    cfg
}

pub fn model(cfg: &RunConfig) -> Model {
    Model::new(
        build_bilayer_box(&cfg.geometry.box_spec()).unwrap(),
        cfg.materials.film,
        cfg.materials.substrate,
        cfg.growth.kind,
        cfg.growth.m0,
        &Constraints::periodic_clamped(),
    )
    .unwrap()
}

pub fn monitor(cfg: &RunConfig, model: &Model) -> Monitor {
    Monitor::new(model, cfg.geometry.ly / 5.0, 8)
}
