//! Post-processing: per-layer energies, film-top sampling and probes, bifurcation detection and
//! wrinkle wavelength extraction.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign};

use crate::assembly::Model;
use crate::error::{AnalysisError, FemError};
use crate::mesh::{Axis, FacetSet, Mesh};
use crate::tensor::Vec3;

/// Stored energy of one layer split by part.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerEnergy {
    pub iso: f64,
    pub vol: f64,
    pub ani: f64,
}

impl LayerEnergy {
    pub fn total(&self) -> f64 {
        self.iso + self.vol + self.ani
    }
}

impl Add for LayerEnergy {
    type Output = LayerEnergy;
    fn add(self, o: LayerEnergy) -> LayerEnergy {
        LayerEnergy { iso: self.iso + o.iso, vol: self.vol + o.vol, ani: self.ani + o.ani }
    }
}

impl AddAssign for LayerEnergy {
    fn add_assign(&mut self, o: LayerEnergy) {
        *self = *self + o;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub film: LayerEnergy,
    pub substrate: LayerEnergy,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.film.total() + self.substrate.total()
    }

    /// `[film iso, film vol, film ani, substrate iso, substrate vol, substrate ani]`.
    pub fn components(&self) -> [f64; 6] {
        [self.film.iso, self.film.vol, self.film.ani, self.substrate.iso, self.substrate.vol, self.substrate.ani]
    }
}

/// Quadrature sums of `ψ_iso`, `ψ_vol(θ)` and `ψ_ani(λ̄)` per layer.
pub fn layer_energies(model: &Model, free: &[f64], g: f64) -> Result<EnergyBreakdown, FemError> {
    Ok(model.assemble(free, g, None, None)?.energy)
}

/// P2 triangle basis in facet node order (corners, then midpoints of (0,1) (1,2) (2,0)).
pub fn triangle_shape(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// The film-top facets projected onto the xy-plane, for point location and interpolation.
#[derive(Clone, Debug)]
pub struct TopSurface {
    facets: Vec<([usize; 6], [[f64; 2]; 3])>,
    pub lower: Vec3,
    pub upper: Vec3,
}

impl TopSurface {
    pub fn new(mesh: &Mesh) -> TopSurface {
        let facets = mesh
            .facets(FacetSet::Top)
            .iter()
            .map(|f| {
                let p = |k: usize| [mesh.nodes[f.nodes[k]][0], mesh.nodes[f.nodes[k]][1]];
                (f.nodes, [p(0), p(1), p(2)])
            })
            .collect();
        TopSurface { facets, lower: mesh.lower, upper: mesh.upper }
    }

    /// Facet index and barycentric coordinates of `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, [f64; 3]), AnalysisError> {
        let scale = (self.upper - self.lower).norm().max(f64::MIN_POSITIVE);
        let tol = 1e-10;
        for (k, (_, p)) in self.facets.iter().enumerate() {
            let (x0, y0) = (p[0][0], p[0][1]);
            let (ax, ay) = (p[1][0] - x0, p[1][1] - y0);
            let (bx, by) = (p[2][0] - x0, p[2][1] - y0);
            let det = ax * by - ay * bx;
            if libm::fabs(det) <= 1e-14 * scale * scale {
                continue;
            }
            let (dx, dy) = (x - x0, y - y0);
            let l1 = (dx * by - dy * bx) / det;
            let l2 = (ax * dy - ay * dx) / det;
            let l = [1.0 - l1 - l2, l1, l2];
            let worst = l.iter().fold(f64::INFINITY, |m, v| m.min(*v));
            if worst >= -tol {
                return Ok((k, l));
            }
        }
        Err(AnalysisError::PointOutsideSurface { x, y })
    }

    /// Component `component` of a nodal field at `(x, y)` on the top surface.
    pub fn interpolate(&self, x: f64, y: f64, nodal: &[Vec3], component: usize) -> Result<f64, AnalysisError> {
        let (k, l) = self.locate(x, y)?;
        let n = triangle_shape(l);
        Ok(self.facets[k].0.iter().zip(n).map(|(&id, w)| w * nodal[id][component]).sum())
    }

    /// Vertical displacement at `n` evenly spaced points along the centerline parallel to `axis`.
    /// The last point is one spacing short of the far end, so the samples cover one period.
    pub fn centerline_samples(&self, nodal: &[Vec3], axis: Axis, n: usize) -> Result<Vec<f64>, AnalysisError> {
        let a = axis.index();
        let b = 1 - a;
        let length = self.upper[a] - self.lower[a];
        let mid = 0.5 * (self.lower[b] + self.upper[b]);
        (0..n)
            .map(|i| {
                let s = self.lower[a] + length * i as f64 / n as f64;
                let (x, y) = if a == 0 { (s, mid) } else { (mid, s) };
                self.interpolate(x, y, nodal, 2)
            })
            .collect()
    }
}

/// Three film-top probe points A, B, C.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    pub points: [Vec3; 3],
}

impl ProbeSet {
    /// A, B, C on the y-running centerline at `y0 + {0, λ/4, λ/2}`, with `y0` a quarter of the
    /// way along the mesh.
    pub fn on_centerline(mesh: &Mesh, lambda: f64) -> ProbeSet {
        let x = 0.5 * (mesh.lower[0] + mesh.upper[0]);
        let y0 = mesh.lower[1] + 0.25 * (mesh.upper[1] - mesh.lower[1]);
        let z = mesh.upper[2];
        let ly = mesh.upper[1] - mesh.lower[1];
        let wrap = |y: f64| mesh.lower[1] + libm::fmod(y - mesh.lower[1], ly);
        ProbeSet {
            points: [
                Vec3::new(x, wrap(y0), z),
                Vec3::new(x, wrap(y0 + 0.25 * lambda), z),
                Vec3::new(x, wrap(y0 + 0.5 * lambda), z),
            ],
        }
    }

    /// Vertical displacement at each probe.
    pub fn values(&self, surface: &TopSurface, nodal: &[Vec3]) -> Result<[f64; 3], AnalysisError> {
        let mut w = [0.0; 3];
        for (k, p) in self.points.iter().enumerate() {
            w[k] = surface.interpolate(p[0], p[1], nodal, 2)?;
        }
        Ok(w)
    }
}

/// One accepted step as seen by the detector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistoryPoint {
    pub g: f64,
    pub probes: [f64; 3],
    /// Peak-to-peak vertical deflection along an x-running film-top line, which stays flat while
    /// the deformation is a pure y-mode.
    pub transverse_spread: f64,
    pub energy: f64,
}

impl HistoryPoint {
    pub fn probe_spread(&self) -> f64 {
        let w = self.probes;
        libm::fabs(w[0] - w[1]).max(libm::fabs(w[1] - w[2])).max(libm::fabs(w[0] - w[2]))
    }
}

/// Detector thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorConfig {
    /// Displacement divergence threshold as a fraction of the total height `H`.
    pub displacement_factor: f64,
    /// Required ratio of the energy second difference to its pre-critical median.
    pub kink_factor: f64,
    /// Steps on either side of a displacement event searched for the energy kink.
    pub kink_window: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { displacement_factor: 1e-3, kink_factor: 10.0, kink_window: 5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BifurcationEvent {
    /// Growth level of the first accepted step past the threshold.
    pub g_cr: f64,
    pub step: usize,
    /// 1 for the primary (y-mode) event, 2 for the secondary (x-mode) event.
    pub mode: usize,
    /// Whether the total-energy kink criterion fired near the same step.
    pub energy_confirmed: bool,
}

/// Divided second differences of `E(g)`; entry `k` belongs to step `k + 1`.
fn energy_second_differences(history: &[HistoryPoint]) -> Vec<f64> {
    history
        .windows(3)
        .map(|w| {
            let (g0, g1, g2) = (w[0].g, w[1].g, w[2].g);
            let d1 = (w[1].energy - w[0].energy) / (g1 - g0);
            let d2 = (w[2].energy - w[1].energy) / (g2 - g1);
            2.0 * (d2 - d1) / (g2 - g0)
        })
        .collect()
}

fn median_abs(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v: Vec<f64> = values.iter().map(|x| libm::fabs(*x)).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn energy_kink_near(history: &[HistoryPoint], step: usize, cfg: &DetectorConfig) -> bool {
    let d2 = energy_second_differences(history);
    if step < 3 || d2.is_empty() {
        return false;
    }
    let pre_end = step.saturating_sub(cfg.kink_window + 1).min(d2.len());
    let reference = median_abs(&d2[..pre_end]);
    let lo = step.saturating_sub(cfg.kink_window + 1);
    let hi = (step + cfg.kink_window).min(d2.len());
    (lo..hi).any(|k| libm::fabs(d2[k]) > cfg.kink_factor * reference && reference > 0.0)
        || (lo + 1..hi).any(|k| d2[k - 1].signum() != d2[k].signum() && libm::fabs(d2[k]) > cfg.kink_factor * reference)
}

/// Primary event: first step whose probe spread exceeds `displacement_factor · H`. Secondary
/// event: first later step whose transverse spread exceeds the same threshold.
pub fn detect_bifurcations(history: &[HistoryPoint], height: f64, cfg: &DetectorConfig) -> Vec<BifurcationEvent> {
    let mut events = Vec::new();
    if history.len() < 3 {
        return events;
    }
    let threshold = cfg.displacement_factor * height;
    let Some(first) = history.iter().position(|h| h.probe_spread() > threshold) else {
        return events;
    };
    events.push(BifurcationEvent {
        g_cr: history[first].g,
        step: first,
        mode: 1,
        energy_confirmed: energy_kink_near(history, first, cfg),
    });
    if let Some(k) = history[first..].iter().position(|h| h.transverse_spread > threshold) {
        let second = first + k;
        if second > first {
            events.push(BifurcationEvent {
                g_cr: history[second].g,
                step: second,
                mode: 2,
                energy_confirmed: energy_kink_near(history, second, cfg),
            });
        }
    }
    events
}

/// Magnitudes of the discrete Fourier coefficients `1..=n/2` of mean-free samples.
pub fn spectrum(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let phase = 2.0 * core::f64::consts::PI * (k * j % n) as f64 / n as f64;
                re += (s - mean) * libm::cos(phase);
                im -= (s - mean) * libm::sin(phase);
            }
            libm::sqrt(re * re + im * im)
        })
        .collect()
}

/// Wavelength `length / k*` of the dominant Fourier mode of periodic samples.
pub fn extract_wavelength_from_samples(samples: &[f64], length: f64) -> Result<f64, AnalysisError> {
    if samples.len() < 8 {
        return Err(AnalysisError::TooFewSamples(samples.len()));
    }
    let spec = spectrum(samples);
    let (k, peak) = spec.iter().enumerate().fold((0, 0.0), |b, (k, v)| if *v > b.1 { (k, *v) } else { b });
    let median = median_abs(&spec);
    if !(peak > 3.0 * median) {
        return Err(AnalysisError::NoDominantMode { peak, median });
    }
    Ok(length / (k + 1) as f64)
}

/// Samples the film-top centerline along `axis` at spacing at most `max_spacing` and returns the
/// dominant wavelength.
pub fn extract_wavelength(
    mesh: &Mesh,
    nodal: &[Vec3],
    axis: Axis,
    max_spacing: f64,
) -> Result<f64, AnalysisError> {
    let surface = TopSurface::new(mesh);
    let length = mesh.upper[axis.index()] - mesh.lower[axis.index()];
    let n = libm::ceil(length / max_spacing) as usize;
    let samples = surface.centerline_samples(nodal, axis, n.max(8))?;
    extract_wavelength_from_samples(&samples, length)
}

/// Peak-to-peak vertical deflection along the x-running line through `y`.
pub fn transverse_spread(surface: &TopSurface, nodal: &[Vec3], y: f64, n: usize) -> Result<f64, AnalysisError> {
    let lx = surface.upper[0] - surface.lower[0];
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = surface.interpolate(surface.lower[0] + lx * i as f64 / n as f64, y, nodal, 2)?;
    }
    let max = w.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let min = w.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    Ok(max - min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_bilayer_box, BoxSpec};

    fn history_with_jump(k: usize, n: usize) -> Vec<HistoryPoint> {
        (0..n)
            .map(|i| {
                let g = 1e-3 * i as f64;
                let w = if i >= k { 0.01 * (1 + i - k) as f64 } else { 0.0 };
                // smooth quadratic energy with a kink at k
                let e = g * g + if i >= k { -0.5 * (g - 1e-3 * k as f64) } else { 0.0 };
                HistoryPoint { g, probes: [0.0, w, -w], transverse_spread: 0.0, energy: e }
            })
            .collect()
    }

    #[test]
    fn synthetic_divergence_is_found_at_its_step() {
        let h = history_with_jump(12, 30);
        let ev = detect_bifurcations(&h, 4.0, &DetectorConfig::default());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].step, 12);
        assert_eq!(ev[0].g_cr, h[12].g);
        assert!(ev[0].energy_confirmed);
    }

    #[test]
    fn homogeneous_history_has_no_event() {
        let h: Vec<HistoryPoint> = (0..20)
            .map(|i| HistoryPoint { g: i as f64 * 1e-3, probes: [0.1; 3], transverse_spread: 0.0, energy: i as f64 })
            .collect();
        assert!(detect_bifurcations(&h, 4.0, &DetectorConfig::default()).is_empty());
        assert!(detect_bifurcations(&h[..2], 4.0, &DetectorConfig::default()).is_empty());
    }

    #[test]
    fn secondary_event_uses_transverse_spread() {
        let mut h = history_with_jump(5, 30);
        for p in h.iter_mut().skip(20) {
            p.transverse_spread = 0.05;
        }
        let ev = detect_bifurcations(&h, 4.0, &DetectorConfig::default());
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[1].step, ev[1].mode), (20, 2));
    }

    #[test]
    fn synthetic_wavelength_is_recovered() {
        let length = 240.0;
        let n = 960;
        for lambda in [240.0, 30.0, 16.0, 8.0] {
            let s: Vec<f64> = (0..n)
                .map(|i| libm::sin(2.0 * core::f64::consts::PI * (length * i as f64 / n as f64) / lambda) + 0.2)
                .collect();
            let got = extract_wavelength_from_samples(&s, length).unwrap();
            assert!((got - lambda).abs() <= length / n as f64, "{got} vs {lambda}");
        }
    }

    #[test]
    fn flat_field_has_no_dominant_mode() {
        let s = vec![0.3; 64];
        assert!(matches!(extract_wavelength_from_samples(&s, 1.0), Err(AnalysisError::NoDominantMode { .. })));
        assert!(matches!(extract_wavelength_from_samples(&s[..4], 1.0), Err(AnalysisError::TooFewSamples(4))));
    }

    #[test]
    fn surface_interpolation_is_exact_for_quadratics() {
        let mesh = build_bilayer_box(&BoxSpec {
            lx: 2.0,
            ly: 3.0,
            h: 1.0,
            h_film: 0.5,
            nx: 2,
            ny: 3,
            nz_subs: 1,
            nz_film: 1,
        })
        .unwrap();
        let field = |x: f64, y: f64| 0.3 + x * y - 0.2 * y * y + 0.1 * x;
        let nodal: Vec<Vec3> = mesh.nodes.iter().map(|p| Vec3::new(0.0, 0.0, field(p[0], p[1]))).collect();
        let surf = TopSurface::new(&mesh);
        for (x, y) in [(0.0, 0.0), (0.37, 2.9), (1.99, 1.23), (2.0, 3.0)] {
            assert!((surf.interpolate(x, y, &nodal, 2).unwrap() - field(x, y)).abs() < 1e-12);
        }
        assert!(surf.interpolate(5.0, 1.0, &nodal, 2).is_err());
        let probes = ProbeSet::on_centerline(&mesh, 2.0);
        let ys: Vec<f64> = probes.points.iter().map(|p| p[1]).collect();
        assert_eq!(ys, vec![0.75, 1.25, 1.75]);
        assert!(probes.points.iter().all(|p| p[2] == 1.0 && p[0] == 1.0));
    }
}
