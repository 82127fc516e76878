//! JSON run configuration. Every section has defaults (the bilayer study values), unknown keys
//! are rejected, and [`RunConfig::validate`] runs before any model is allocated.

use std::path::{Path, PathBuf};

use growthfem_core::material::{GrowthKind, MaterialParams};
use growthfem_core::mesh::BoxSpec;
use growthfem_core::perturbation::{PerturbationPattern, PerturbationSpec};
use growthfem_core::{MaterialError, Vec3};
use serde::{Deserialize, Serialize};

use crate::continuation::ContinuationConfig;
use crate::error::{ConfigError, IoError};

/// Box dimensions and element counts. Defaults: the long strip, element size 0.5.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub h_film: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz_subs: usize,
    pub nz_film: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { lx: 1.0, ly: 240.0, h: 4.0, h_film: 0.5, nx: 2, ny: 480, nz_subs: 7, nz_film: 1 }
    }
}

impl GeometryConfig {
    pub fn box_spec(&self) -> BoxSpec {
        BoxSpec {
            lx: self.lx,
            ly: self.ly,
            h: self.h,
            h_film: self.h_film,
            nx: self.nx,
            ny: self.ny,
            nz_subs: self.nz_subs,
            nz_film: self.nz_film,
        }
    }

    /// Element counts multiplied by `factor` (at least one cell per direction).
    pub fn refined(&self, factor: f64) -> GeometryConfig {
        let scale = |n: usize| ((n as f64 * factor).round() as usize).max(1);
        GeometryConfig {
            nx: scale(self.nx),
            ny: scale(self.ny),
            nz_subs: scale(self.nz_subs),
            nz_film: scale(self.nz_film),
            ..*self
        }
    }

    /// In-plane element size along y.
    pub fn element_size(&self) -> f64 {
        self.ly / self.ny as f64
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [("lx", self.lx), ("ly", self.ly), ("h", self.h), ("h_film", self.h_film)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(format!("geometry.{field}"), format!("must be positive, got {v}")));
            }
        }
        if self.h_film >= self.h {
            return Err(ConfigError::invalid("geometry.h_film", "must be smaller than geometry.h"));
        }
        for (field, n) in [("nx", self.nx), ("ny", self.ny), ("nz_subs", self.nz_subs), ("nz_film", self.nz_film)] {
            if n == 0 {
                return Err(ConfigError::invalid(format!("geometry.{field}"), "must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialsConfig {
    pub film: MaterialParams,
    pub substrate: MaterialParams,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        MaterialsConfig { film: MaterialParams::film(100.0), substrate: MaterialParams::substrate() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthConfig {
    pub kind: GrowthKind,
    pub m0: Vec3,
    pub g_max: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig { kind: GrowthKind::Planar, m0: Vec3::new(0.0, 0.0, 1.0), g_max: 0.04 }
    }
}

/// Which fiber stiffnesses to run and how far past the first event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Film fiber stiffness per case; zero is the isotropic benchmark.
    pub mu_fibers: Vec<f64>,
    /// Strip runs stop this many accepted steps after the first event.
    pub steps_after_buckling: usize,
    /// RVE side is `2 λ_cr`. When absent the RVE driver reads `strip_summary`.
    pub lambda_cr: Option<f64>,
    pub strip_summary: Option<PathBuf>,
    /// Probe spacing is a quarter of this length; defaults to a fifth of the domain along y.
    pub probe_wavelength: Option<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            mu_fibers: vec![100.0, 250.0, 750.0, 1000.0, 2500.0],
            steps_after_buckling: 20,
            lambda_cr: None,
            strip_summary: None,
            probe_wavelength: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    pub directory: PathBuf,
    /// Zero disables field output.
    pub vtu_every_n_steps: usize,
    /// Growth interval between checkpoints; absent disables them.
    pub checkpoint_every_g: Option<f64>,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig { directory: PathBuf::from("out"), vtu_every_n_steps: 10, checkpoint_every_g: Some(0.005) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub materials: MaterialsConfig,
    pub growth: GrowthConfig,
    pub continuation: ContinuationConfig,
    pub perturbation: PerturbationSpec,
    pub study: StudyConfig,
    pub outputs: OutputsConfig,
}

fn material_field(section: &str, e: MaterialError) -> ConfigError {
    match e {
        MaterialError::InvalidParameter { field, reason } => {
            ConfigError::invalid(format!("materials.{section}.{field}"), reason)
        }
        other => ConfigError::invalid(format!("materials.{section}"), other.to_string()),
    }
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        RunConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Continuation settings with the growth target filled in.
    pub fn continuation(&self) -> ContinuationConfig {
        ContinuationConfig { g_max: self.growth.g_max, ..self.continuation }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.materials.film.validate().map_err(|e| material_field("film", e))?;
        self.materials.substrate.validate().map_err(|e| material_field("substrate", e))?;
        let m0 = self.growth.m0;
        if (m0.norm() - 1.0).abs() > 1e-12 {
            return Err(ConfigError::invalid("growth.m0", format!("must be a unit vector, |m0| = {}", m0.norm())));
        }
        if !(self.growth.g_max > 0.0 && self.growth.g_max.is_finite()) {
            return Err(ConfigError::invalid("growth.g_max", format!("must be positive, got {}", self.growth.g_max)));
        }
        self.continuation().validate()?;
        validate_perturbation(&self.perturbation)?;
        for (i, &mu) in self.study.mu_fibers.iter().enumerate() {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(ConfigError::invalid(format!("study.mu_fibers[{i}]"), format!("must be >= 0, got {mu}")));
            }
        }
        for (field, v) in [("lambda_cr", self.study.lambda_cr), ("probe_wavelength", self.study.probe_wavelength)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError::invalid(format!("study.{field}"), format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(dg) = self.outputs.checkpoint_every_g {
            if !(dg > 0.0 && dg.is_finite()) {
                return Err(ConfigError::invalid("outputs.checkpoint_every_g", format!("must be positive, got {dg}")));
            }
        }
        if self.outputs.directory.as_os_str().is_empty() {
            return Err(ConfigError::invalid("outputs.directory", "must not be empty"));
        }
        Ok(())
    }

    /// Creates the output directory and checks it accepts files.
    pub fn prepare_output_dir(&self) -> Result<PathBuf, ConfigError> {
        let dir = self.outputs.directory.clone();
        std::fs::create_dir_all(&dir).map_err(|e| IoError::io(&dir, e))?;
        let probe = dir.join(".write-test");
        std::fs::write(&probe, b"").map_err(|e| IoError::io(&probe, e))?;
        std::fs::remove_file(&probe).map_err(|e| IoError::io(&probe, e))?;
        Ok(dir)
    }
}

fn validate_perturbation(p: &PerturbationSpec) -> Result<(), ConfigError> {
    if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
        return Err(ConfigError::invalid("perturbation.amplitude", format!("must be >= 0, got {}", p.amplitude)));
    }
    let [lo, hi] = p.active_window;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(ConfigError::invalid("perturbation.active_window", format!("[{lo}, {hi}] is not an interval")));
    }
    if let PerturbationPattern::EccentricBump { sigma, .. } = p.pattern {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(ConfigError::invalid("perturbation.pattern.sigma", format!("must be positive, got {sigma}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_shear_modulus_names_the_field() {
        let mut cfg = RunConfig::default();
        cfg.materials.film.mu0 = -1.0;
        match RunConfig::from_json(&cfg.to_json()) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "materials.film.mu0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"geometry": {"lz": 3}}"#), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn continuation_takes_the_growth_target() {
        let mut cfg = RunConfig::default();
        cfg.growth.g_max = 0.01;
        assert_eq!(cfg.continuation().g_max, 0.01);
    }
}
