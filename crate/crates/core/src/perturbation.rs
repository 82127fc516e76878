//! Small eccentric in-plane traction on the film top that seeds the wrinkling mode.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::triangle_shape;
use crate::mesh::{FacetSet, Mesh};
use crate::tensor::Vec3;

/// Spatial form of the traction, in units of `amplitude · μ_subs`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PerturbationPattern {
    /// Periodic Gaussian bump `d · exp(−r² / 2σ²)` centred at fractional in-plane position
    /// `center`, with `r` the minimum-image distance.
    EccentricBump { center: [f64; 2], sigma: f64, direction: [f64; 2] },
    /// `[sin(2πx/Lx + φx), sin(2πy/Ly + φy), 0]`.
    PhasedSine { phase: [f64; 2] },
}

impl Default for PerturbationPattern {
    fn default() -> Self {
        PerturbationPattern::EccentricBump { center: [0.3, 0.3], sigma: 1.0, direction: [0.6, 0.8] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub pattern: PerturbationPattern,
    /// Closed g-interval in which the load is applied.
    pub active_window: [f64; 2],
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec { amplitude: 1e-6, pattern: PerturbationPattern::default(), active_window: [0.0, f64::MAX] }
    }
}

impl PerturbationSpec {
    pub fn none() -> Self {
        PerturbationSpec { amplitude: 0.0, ..Default::default() }
    }

    pub fn is_active(&self, g: f64) -> bool {
        self.amplitude > 0.0 && g >= self.active_window[0] && g <= self.active_window[1]
    }

    /// Traction per unit reference area at in-plane point `(x, y)`.
    pub fn traction(&self, mesh: &Mesh, mu_subs: f64, x: f64, y: f64) -> Vec3 {
        let scale = self.amplitude * mu_subs;
        let lo = mesh.lower;
        let len = mesh.extent();
        match self.pattern {
            PerturbationPattern::EccentricBump { center, sigma, direction } => {
                let wrap = |d: f64, l: f64| d - l * libm::round(d / l);
                let dx = wrap(x - (lo[0] + center[0] * len[0]), len[0]);
                let dy = wrap(y - (lo[1] + center[1] * len[1]), len[1]);
                let b = scale * libm::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                Vec3::new(b * direction[0], b * direction[1], 0.0)
            }
            PerturbationPattern::PhasedSine { phase } => {
                let tau = 2.0 * core::f64::consts::PI;
                Vec3::new(
                    scale * libm::sin(tau * (x - lo[0]) / len[0] + phase[0]),
                    scale * libm::sin(tau * (y - lo[1]) / len[1] + phase[1]),
                    0.0,
                )
            }
        }
    }
}

/// Six-point degree-4 triangle rule: barycentric points and weights summing to 1.
const TRI_RULE: [([f64; 3], f64); 6] = [
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
];

/// Consistent nodal forces (3 per node) of the traction on the top facets; zero outside the
/// active window.
pub fn apply_perturbation(spec: &PerturbationSpec, mesh: &Mesh, mu_subs: f64, g: f64) -> Vec<f64> {
    let mut f = vec![0.0; 3 * mesh.num_nodes()];
    if !spec.is_active(g) {
        return f;
    }
    for facet in mesh.facets(FacetSet::Top) {
        let p = [mesh.nodes[facet.nodes[0]], mesh.nodes[facet.nodes[1]], mesh.nodes[facet.nodes[2]]];
        let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        for (l, w) in TRI_RULE {
            let x = p[0].scale(l[0]) + p[1].scale(l[1]) + p[2].scale(l[2]);
            let t = spec.traction(mesh, mu_subs, x[0], x[1]);
            let n = triangle_shape(l);
            for (a, &node) in facet.nodes.iter().enumerate() {
                for c in 0..3 {
                    f[3 * node + c] += w * area * n[a] * t[c];
                }
            }
        }
    }
    f
}

/// Sum of the nodal forces.
pub fn resultant(forces: &[f64]) -> Vec3 {
    let mut r = Vec3::zero();
    for chunk in forces.chunks_exact(3) {
        for c in 0..3 {
            r[c] += chunk[c];
        }
    }
    r
}
