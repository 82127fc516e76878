//! Independent oracles for the constitutive law, element, assembly and analysis layers. Each
//! check reports its measured error next to the tolerance it is held to.

use std::time::Instant;

use growthfem_core::analysis::{
    detect_bifurcations, extract_wavelength_from_samples, DetectorConfig, HistoryPoint,
};
use growthfem_core::assembly::{Constraints, Dirichlet, Model, SymmetricCsc};
use growthfem_core::material::{
    dpsi_vol, elastic_decompose, elastic_decompose_with, evaluate, evaluate_lagrangian, inverse_growth_tensor,
    make_growth_tensor, total_pullback, GrowthKind, GrowthSpec, MaterialParams,
};
use growthfem_core::mesh::{build_bilayer_box, find_periodic_pairs, validate_mesh, Axis, BoxSpec, FacetSet, Mesh};
use growthfem_core::perturbation::{apply_perturbation, resultant, PerturbationSpec};
use growthfem_core::tensor::{push_forward_moduli, push_forward_stress};
use growthfem_core::{Tensor2, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::continuation::NEWTON_SOLVE_TOLERANCE;
use crate::linear::LinearSolver;
use crate::newton::{newton_solve, NewtonConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured error (or the quantity the check bounds).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// A random point of the constitutive domain.
#[derive(Clone, Copy, Debug)]
pub struct RandomState {
    pub f: Tensor2,
    pub spec: GrowthSpec,
    pub params: MaterialParams,
}

/// `det Fe ∈ [0.3, 2]`, `g ∈ [0, 0.05]`, both growth kinds, the given material rows in turn.
pub fn random_states(rows: &[MaterialParams], n: usize, seed: u64) -> Vec<RandomState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let params = rows[k % rows.len()];
            let g = rng.random_range(0.0..0.05);
            let spec = if rng.random_bool(0.5) {
                GrowthSpec::isotropic(g)
            } else {
                let m = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
                GrowthSpec::planar(g, m.scale(1.0 / m.norm()))
            };
            let fe = loop {
                let mut a = Tensor2::identity();
                for i in 0..3 {
                    for j in 0..3 {
                        a.0[i][j] += 0.3 * rng.random_range(-1.0..1.0);
                    }
                }
                if a.det() > 0.2 {
                    let target: f64 = rng.random_range(0.3..2.0);
                    break a.scale((target / a.det()).cbrt());
                }
            };
            let fg = make_growth_tensor(&spec).expect("valid growth");
            RandomState { f: fe.dot(&fg), spec, params }
        })
        .collect()
}

fn kirchhoff(params: &MaterialParams, fe: &Tensor2) -> (Tensor2, f64) {
    let i = Tensor2::identity();
    let kin = elastic_decompose_with(fe, &i, &i, &params.n0).expect("positive Je");
    let r = evaluate(params, &kin);
    (r.tau(), r.psi())
}

/// Worst `‖τ − τ_FD‖ / max(‖τ‖, μ0)` with `τ_FD = ∂ψ/∂Fe · Feᵀ` by central differences.
pub fn stress_fd_error(states: &[RandomState], h: f64) -> f64 {
    states
        .iter()
        .map(|s| {
            let kin = elastic_decompose(&s.f, &s.spec, &s.params.n0).expect("positive Je");
            let tau = evaluate(&s.params, &kin).tau();
            let fe = kin.fe;
            let mut dpsi = Tensor2::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let mut p = fe;
                    let mut m = fe;
                    p.0[i][j] += h;
                    m.0[i][j] -= h;
                    dpsi.0[i][j] = (kirchhoff(&s.params, &p).1 - kirchhoff(&s.params, &m).1) / (2.0 * h);
                }
            }
            let fd = dpsi.dot(&fe.transpose());
            (tau - fd).norm() / tau.norm().max(s.params.mu0)
        })
        .fold(0.0, f64::max)
}

/// Worst `‖𝕔 : A − Fe δSe Feᵀ‖ / max(‖𝕔‖, μ0)` over symmetric unit directions `A`, with
/// `δSe` the central difference of `Se = Fe⁻¹ τ Fe⁻ᵀ` under `Fe → (I + εA) Fe`.
pub fn moduli_fd_error(states: &[RandomState], h: f64) -> f64 {
    let mut worst = 0.0f64;
    for s in states {
        let kin = elastic_decompose(&s.f, &s.spec, &s.params.n0).expect("positive Je");
        let c = evaluate(&s.params, &kin).moduli();
        let fe = kin.fe;
        let scale = c.max_abs().max(s.params.mu0);
        let se = |eps: f64, a: &Tensor2| {
            let fe_e = (Tensor2::identity() + a.scale(eps)).dot(&fe);
            let (tau, _) = kirchhoff(&s.params, &fe_e);
            let inv = fe_e.inv().expect("invertible");
            inv.dot(&tau).dot(&inv.transpose())
        };
        for k in 0..3 {
            for l in k..3 {
                let a = (Vec3::unit(k).outer(&Vec3::unit(l)) + Vec3::unit(l).outer(&Vec3::unit(k))).scale(0.5);
                let ds = (se(h, &a) - se(-h, &a)).scale(1.0 / (2.0 * h));
                let fd = fe.dot(&ds).dot(&fe.transpose());
                worst = worst.max((c.contract(&a) - fd).max_abs() / scale);
            }
        }
    }
    worst
}

/// Worst relative gap between the Eulerian response and the push-forward of the total
/// Lagrangian one: `τ = F S Fᵀ`, `𝕔 = F F F F ℂ`.
pub fn configuration_equivalence_error(states: &[RandomState]) -> f64 {
    states
        .iter()
        .map(|s| {
            let kin = elastic_decompose(&s.f, &s.spec, &s.params.n0).expect("positive Je");
            let e = evaluate(&s.params, &kin);
            let lag = evaluate_lagrangian(&s.params, &kin).expect("invertible Ce");
            let (big_s, big_c) = total_pullback(&lag, &s.spec).expect("valid growth");
            let tau = push_forward_stress(&big_s, &s.f);
            let c = push_forward_moduli(&big_c, &s.f);
            let dt = (e.tau() - tau).max_abs() / e.tau().max_abs().max(s.params.mu0);
            let dc = (e.moduli() - c).max_abs() / e.moduli().max_abs().max(s.params.mu0);
            dt.max(dc)
        })
        .fold(0.0, f64::max)
}

/// Worst `‖Fg⁻¹ Fg − I‖` over both growth kinds and a sweep of g.
pub fn growth_inverse_error() -> f64 {
    let m = Vec3::new(0.3, -0.4, 1.0);
    let m = m.scale(1.0 / m.norm());
    let mut worst = 0.0f64;
    for k in 0..=50 {
        let g = -0.2 + 0.01 * k as f64;
        for spec in [GrowthSpec::isotropic(g), GrowthSpec::planar(g, m)] {
            let r = inverse_growth_tensor(&spec).unwrap().dot(&make_growth_tensor(&spec).unwrap());
            worst = worst.max((r - Tensor2::identity()).max_abs());
        }
    }
    worst
}

/// Minimal periodic mesh: one box in plane, one cell layer per region (12 cells).
pub fn minimal_periodic_mesh() -> Mesh {
    build_bilayer_box(&BoxSpec { lx: 1.0, ly: 1.0, h: 1.0, h_film: 0.5, nx: 1, ny: 1, nz_subs: 1, nz_film: 1 })
        .expect("valid box")
}

pub fn bilayer_model(mesh: Mesh, mu_fiber: f64, constraints: &Constraints) -> Model {
    Model::new(
        mesh,
        MaterialParams::film(mu_fiber),
        MaterialParams::substrate(),
        GrowthKind::Planar,
        Vec3::new(0.0, 0.0, 1.0),
        constraints,
    )
    .expect("valid model")
}

/// Relative errors of the assembled residual against the central-difference gradient of the
/// condensed potential, and of the assembled tangent against the central-difference Jacobian
/// of the residual, at a seeded random state.
pub fn element_consistency_errors(model: &Model, g: f64, amplitude: f64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..model.num_free()).map(|_| amplitude * rng.random_range(-1.0..1.0)).collect();
    let mut k = model.tangent_pattern();
    let a = model.assemble(&u, g, None, Some(&mut k)).expect("admissible state");
    let n = u.len();
    let h = 1e-7;
    let shifted = |i: usize, d: f64| {
        let mut v = u.clone();
        v[i] += d;
        v
    };
    let r_scale = a.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r_err = 0.0f64;
    let mut k_err = 0.0f64;
    let k_scale = k.max_abs();
    for i in 0..n {
        let pp = model.potential(&shifted(i, h), g, None).unwrap();
        let pm = model.potential(&shifted(i, -h), g, None).unwrap();
        r_err = r_err.max(((pp - pm) / (2.0 * h) - a.residual[i]).abs() / r_scale);
        let rp = model.assemble(&shifted(i, h), g, None, None).unwrap().residual;
        let rm = model.assemble(&shifted(i, -h), g, None, None).unwrap().residual;
        for j in 0..n {
            k_err = k_err.max(((rp[j] - rm[j]) / (2.0 * h) - k.get(j, i)).abs() / k_scale);
        }
    }
    (r_err, k_err)
}

/// Free growth of a traction-free 2×2×2-cell box with rigid modes pinned at three corners.
/// Returns (max nodal deviation from `Fg X`, max |p|, |s| over cells / μ_film).
pub fn free_growth_patch(g: f64) -> Result<(f64, f64), String> {
    let mesh = build_bilayer_box(&BoxSpec { lx: 2.0, ly: 2.0, h: 2.0, h_film: 1.0, nx: 2, ny: 2, nz_subs: 1, nz_film: 1 })
        .expect("valid box");
    let find = |p: [f64; 3]| {
        mesh.nodes.iter().position(|x| (0..3).all(|i| (x[i] - p[i]).abs() < 1e-12)).expect("corner node")
    };
    let (o, ax, ay) = (find([0.0, 0.0, 0.0]), find([2.0, 0.0, 0.0]), find([0.0, 2.0, 0.0]));
    let pin = |node, component| Dirichlet { node, component, value: 0.0 };
    let constraints = Constraints {
        periodic: vec![],
        fix_bottom: false,
        dirichlet: vec![pin(o, 0), pin(o, 1), pin(o, 2), pin(ax, 1), pin(ax, 2), pin(ay, 2)],
    };
    let model = bilayer_model(mesh, 750.0, &constraints);
    let (free, assembly) = solve_at(&model, g, None)?;
    let fg = make_growth_tensor(&model.growth_spec(g)).unwrap();
    let nodal = model.dofs.expand(&free);
    let mut dev = 0.0f64;
    for (x, u) in model.mesh.nodes.iter().zip(&nodal) {
        let exact = (fg - Tensor2::identity()).mul_vec(x);
        dev = dev.max((*u - exact).0.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let stress = assembly.mixed.iter().fold(0.0f64, |m, s| m.max(s.p.abs()).max(s.s.abs()));
    Ok((dev, stress / model.film.mu0))
}

/// Newton from the zero state in growth increments of at most 1e-3.
fn solve_at(
    model: &Model,
    g: f64,
    external: Option<&[f64]>,
) -> Result<(Vec<f64>, growthfem_core::assembly::Assembly), String> {
    let mut solver = LinearSolver::with_tolerance(NEWTON_SOLVE_TOLERANCE);
    let mut k: SymmetricCsc = model.tangent_pattern();
    let cfg = NewtonConfig { max_iter: 30, rel_tol: 1e-12, abs_tol: 1e-11, check_stability: false };
    let steps = (g / 1e-3).ceil().max(1.0) as usize;
    let mut u = vec![0.0; model.num_free()];
    for i in 1..=steps {
        let gi = g * i as f64 / steps as f64;
        let out = newton_solve(model, &mut solver, &mut k, &u, gi, g / steps as f64, external, &cfg);
        let (next, assembly) = out.solution.ok_or_else(|| {
            format!("no convergence at g = {gi}: {}", out.record.failure.clone().unwrap_or_default())
        })?;
        if i == steps {
            return Ok((next, assembly));
        }
        u = next;
    }
    unreachable!("at least one step")
}

/// Out-of-plane stretch of a laterally constrained layer with zero normal traction:
/// one-unknown Newton on `τ_zz(λz) = 0`.
pub fn layer_stretch_oracle(params: &MaterialParams, spec: &GrowthSpec) -> f64 {
    let tzz = |l: f64| {
        let kin = elastic_decompose(&Tensor2::diag(1.0, 1.0, l), spec, &params.n0).expect("positive J");
        evaluate(params, &kin).tau()[(2, 2)]
    };
    let mut l = 1.0;
    for _ in 0..50 {
        let h = 1e-7;
        let step = tzz(l) / ((tzz(l + h) - tzz(l - h)) / (2.0 * h));
        l -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    l
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrebucklingErrors {
    /// max |u_x|, |u_y| / H
    pub in_plane: f64,
    /// max |u_z − u_z,oracle| / max |u_z,oracle|
    pub vertical: f64,
    /// per-layer (max p − min p) / |mean p|, worst layer
    pub pressure_spread: f64,
    /// per-layer |mean p − p_oracle| / |p_oracle|, worst layer
    pub pressure_oracle: f64,
    /// max |θ − 1| over cells
    pub max_dilatation: f64,
}

/// Flat periodic RVE with a clamped bottom under planar growth and no perturbation, compared
/// with the per-layer scalar oracle.
pub fn prebuckling_errors(spec: &BoxSpec, mu_fiber: f64, g: f64) -> Result<PrebucklingErrors, String> {
    let model = bilayer_model(build_bilayer_box(spec).expect("valid box"), mu_fiber, &Constraints::periodic_clamped());
    let (free, assembly) = solve_at(&model, g, None)?;
    let growth = model.growth_spec(g);
    let l_s = layer_stretch_oracle(&model.substrate, &growth);
    let l_f = layer_stretch_oracle(&model.film, &growth);
    let interface = spec.h - spec.h_film;
    let uz = |z: f64| {
        if z <= interface {
            (l_s - 1.0) * z
        } else {
            (l_s - 1.0) * interface + (l_f - 1.0) * (z - interface)
        }
    };
    let nodal = model.dofs.expand(&free);
    let uz_max = uz(spec.h).abs();
    let mut e = PrebucklingErrors { in_plane: 0.0, vertical: 0.0, pressure_spread: 0.0, pressure_oracle: 0.0, max_dilatation: 0.0 };
    for (x, u) in model.mesh.nodes.iter().zip(&nodal) {
        e.in_plane = e.in_plane.max(u[0].abs().max(u[1].abs()) / spec.h);
        e.vertical = e.vertical.max((u[2] - uz(x[2])).abs() / uz_max);
    }
    let je = |l: f64| l / (1.0 + g).powi(2);
    for (region, params, l) in [
        (growthfem_core::mesh::Region::Substrate, &model.substrate, l_s),
        (growthfem_core::mesh::Region::Film, &model.film, l_f),
    ] {
        let ps: Vec<f64> =
            (0..model.mesh.num_cells()).filter(|&c| model.mesh.regions[c] == region).map(|c| assembly.mixed[c].p).collect();
        let mean = ps.iter().sum::<f64>() / ps.len() as f64;
        let (lo, hi) = ps.iter().fold((f64::MAX, f64::MIN), |(a, b), &p| (a.min(p), b.max(p)));
        let oracle = dpsi_vol(params.penalty_lambda, je(l));
        e.pressure_spread = e.pressure_spread.max((hi - lo) / mean.abs());
        e.pressure_oracle = e.pressure_oracle.max((mean - oracle).abs() / oracle.abs());
    }
    e.max_dilatation = assembly.mixed.iter().fold(0.0f64, |m, s| m.max((s.theta - 1.0).abs()));
    Ok(e)
}

pub fn prebuckling_box(refinement: usize) -> BoxSpec {
    let r = refinement.max(1);
    BoxSpec { lx: 2.0, ly: 2.0, h: 4.0, h_film: 0.5, nx: 2 * r, ny: 2 * r, nz_subs: 7 * r, nz_film: r }
}

/// `|film + substrate − Π| / |Π|` and the gap between per-cell energies and the layer totals.
pub fn energy_additivity_error(seed: u64) -> f64 {
    let model = bilayer_model(minimal_periodic_mesh(), 250.0, &Constraints::periodic_clamped());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..model.num_free()).map(|_| 0.01 * rng.random_range(-1.0..1.0)).collect();
    let g = 0.01;
    let a = model.assemble(&u, g, None, None).unwrap();
    let pi = model.potential(&u, g, None).unwrap();
    let cells: f64 = model.cell_energies(&u, g).unwrap().iter().map(|e| e.total()).sum();
    let total = a.energy.film.total() + a.energy.substrate.total();
    ((total - pi).abs() / pi.abs()).max((cells - total).abs() / total.abs())
}

/// Mesh invariants of a structured box: validation report, cell count, top area.
pub fn mesh_structure_error(spec: &BoxSpec) -> Result<f64, String> {
    let mesh = build_bilayer_box(spec).map_err(|e| e.to_string())?;
    let report = validate_mesh(&mesh);
    if !report.is_valid() {
        return Err(format!("{:?}", report.issues));
    }
    let expected = 6 * spec.nx * spec.ny * (spec.nz_subs + spec.nz_film);
    if mesh.num_cells() != expected {
        return Err(format!("{} cells, expected {expected}", mesh.num_cells()));
    }
    let area: f64 = mesh
        .facets(FacetSet::Top)
        .iter()
        .map(|f| {
            let [a, b, c] = [mesh.nodes[f.nodes[0]], mesh.nodes[f.nodes[1]], mesh.nodes[f.nodes[2]]];
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum();
    Ok((area - spec.lx * spec.ly).abs())
}

/// Worst follower-leader coordinate residual relative to `max(Lx, Ly)`.
pub fn periodic_pair_error(spec: &BoxSpec) -> Result<f64, String> {
    let mesh = build_bilayer_box(spec).map_err(|e| e.to_string())?;
    let pairs = find_periodic_pairs(&mesh, &[Axis::X, Axis::Y]).map_err(|e| e.to_string())?;
    let scale = spec.lx.max(spec.ly);
    Ok(pairs
        .pairs
        .iter()
        .map(|p| (mesh.nodes[p.follower] - mesh.nodes[p.leader] - p.offset).norm() / scale)
        .fold(0.0, f64::max))
}

/// Sparse LDLᵀ against dense Gaussian elimination on a fixed SPD 5×5 matrix.
pub fn linear_solver_error() -> f64 {
    let dense = [
        [10.0, 1.0, 0.0, 2.0, 0.0],
        [1.0, 8.0, 1.0, 0.0, 0.5],
        [0.0, 1.0, 6.0, 1.0, 0.0],
        [2.0, 0.0, 1.0, 9.0, 1.0],
        [0.0, 0.5, 0.0, 1.0, 4.0],
    ];
    let mut entries = Vec::new();
    for (i, row) in dense.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v != 0.0 && i >= j {
                entries.push((i, j));
            }
        }
    }
    let mut k = SymmetricCsc::from_pattern(5, entries);
    for c in 0..5 {
        for idx in k.col_ptr[c]..k.col_ptr[c + 1] {
            k.values[idx] = dense[k.row_idx[idx]][c];
        }
    }
    let b = [1.0, -2.0, 3.0, 0.5, -1.0];
    let x = LinearSolver::new().solve(&k, &b).expect("SPD");
    // dense elimination
    let mut a = dense;
    let mut y = b;
    for p in 0..5 {
        for r in p + 1..5 {
            let f = a[r][p] / a[p][p];
            for c in p..5 {
                a[r][c] -= f * a[p][c];
            }
            y[r] -= f * y[p];
        }
    }
    let mut z = [0.0; 5];
    for r in (0..5).rev() {
        z[r] = (y[r] - (r + 1..5).map(|c| a[r][c] * z[c]).sum::<f64>()) / a[r][r];
    }
    x.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Wavelength error on a synthetic single-mode field, in units of the sample spacing.
pub fn wavelength_error() -> f64 {
    let length = 240.0;
    let n = 960;
    let mut worst = 0.0f64;
    for lambda in [8.0, 12.0, 30.0, 60.0] {
        let w: Vec<f64> =
            (0..n).map(|i| (2.0 * std::f64::consts::PI * (i as f64 * length / n as f64) / lambda).sin()).collect();
        let found = extract_wavelength_from_samples(&w, length).unwrap_or(f64::INFINITY);
        worst = worst.max((found - lambda).abs() / (length / n as f64));
    }
    worst
}

/// Step-index error of the detector on a probe history that diverges at a known step.
pub fn detector_error() -> f64 {
    let k = 17;
    let history: Vec<HistoryPoint> = (0..40)
        .map(|i| {
            let g = 1e-4 * i as f64;
            let d = if i >= k { 0.01 * (i - k + 1) as f64 } else { 0.0 };
            HistoryPoint { g, probes: [-g, -g + d, -g - d], transverse_spread: 0.0, energy: g * g }
        })
        .collect();
    let events = detect_bifurcations(&history, 4.0, &DetectorConfig::default());
    match events.first() {
        Some(e) => (e.step as f64 - k as f64).abs(),
        None => f64::INFINITY,
    }
}

/// Angle (degrees) between the perturbation resultant and the nearest symmetry plane of the
/// cell; zero means aligned, a zero resultant reports zero.
pub fn perturbation_eccentricity() -> f64 {
    let mesh = build_bilayer_box(&prebuckling_box(1)).expect("valid box");
    let load = apply_perturbation(&PerturbationSpec::default(), &mesh, 1.0, 0.01);
    let r = resultant(&load);
    let inplane = (r[0] * r[0] + r[1] * r[1]).sqrt();
    if inplane == 0.0 {
        return 0.0;
    }
    // symmetry planes of a square cell: x = c, y = c and both diagonals
    let angle = r[1].atan2(r[0]).to_degrees().rem_euclid(45.0);
    angle.min(45.0 - angle)
}

struct Runner {
    checks: Vec<Check>,
}

impl Runner {
    fn run(&mut self, name: &str, tolerance: f64, detail: &str, f: impl FnOnce() -> Result<f64, String>) {
        let t = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|p| {
                let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                Err(msg.unwrap_or_else(|| "panicked".into()))
            });
        let (value, passed, detail) = match result {
            Ok(v) => (v, v <= tolerance, detail.to_string()),
            Err(e) => (f64::NAN, false, format!("{detail}: {e}")),
        };
        self.checks.push(Check { name: name.into(), passed, value, tolerance, detail, seconds: t.elapsed().as_secs_f64() });
    }

    /// Passes when `value >= threshold`.
    fn at_least(&mut self, name: &str, threshold: f64, detail: &str, f: impl FnOnce() -> f64) {
        let t = Instant::now();
        let v = f();
        self.checks.push(Check {
            name: name.into(),
            passed: v >= threshold,
            value: v,
            tolerance: threshold,
            detail: detail.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
    }
}

/// The full suite. Constitutive checks use the configured film and substrate rows.
pub fn run_verify_checks(cfg: &RunConfig) -> VerifyReport {
    let mut r = Runner { checks: Vec::new() };
    let rows = [cfg.materials.film, cfg.materials.substrate];
    let states = random_states(&rows, 200, 2024);

    r.run("tensor.growth_inverse", 1e-12, "max |Fg⁻¹ Fg − I| over g ∈ [−0.2, 0.3], both kinds", || {
        Ok(growth_inverse_error())
    });
    r.run("material.stress_fd", 1e-6, "200 random states, τ vs ∂ψ/∂Fe·Feᵀ (h = 1e-6)", || {
        Ok(stress_fd_error(&states, 1e-6))
    });
    r.run("material.moduli_fd", 1e-4, "200 random states, 𝕔 vs FD of stress (h = 1e-6)", || {
        Ok(moduli_fd_error(&states, 1e-6))
    });
    r.run("material.configuration_equivalence", 1e-10, "Eulerian τ, 𝕔 vs push-forward of total S, ℂ", || {
        Ok(configuration_equivalence_error(&states))
    });
    let strip = BoxSpec { lx: 1.0, ly: 6.0, h: 4.0, h_film: 0.5, nx: 2, ny: 12, nz_subs: 7, nz_film: 1 };
    r.run("mesh.structure", 1e-12, "validation report empty, 6·n cells, |top area − Lx·Ly|", || {
        mesh_structure_error(&strip)
    });
    r.run("mesh.periodic_pairs", 1e-8, "follower − leader − offset, relative to max(Lx, Ly)", || {
        periodic_pair_error(&strip)
    });
    r.run("fem.residual_gradient", 1e-6, "residual vs FD gradient of the condensed potential", || {
        let model = bilayer_model(minimal_periodic_mesh(), 2500.0, &Constraints::periodic_clamped());
        Ok(element_consistency_errors(&model, 0.01, 0.02, 7).0)
    });
    r.run("fem.tangent_jacobian", 1e-5, "tangent vs FD Jacobian of the residual", || {
        let model = bilayer_model(minimal_periodic_mesh(), 2500.0, &Constraints::periodic_clamped());
        Ok(element_consistency_errors(&model, 0.01, 0.02, 7).1)
    });
    let patch = std::cell::OnceCell::new();
    r.run("fem.free_growth_positions", 1e-8, "traction-free box, g = 0.02: max |u − (Fg − I) X|", || {
        patch.get_or_init(|| free_growth_patch(0.02)).clone().map(|p| p.0)
    });
    r.run("fem.free_growth_stress", 1e-8, "same run: max |p|, |s| / μ_film", || {
        patch.get_or_init(|| free_growth_patch(0.02)).clone().map(|p| p.1)
    });
    let flat = std::cell::OnceCell::new();
    let flat_run = || flat.get_or_init(|| prebuckling_errors(&prebuckling_box(1), 100.0, 0.005)).clone();
    r.run("fem.prebuckling_z_only", 1e-10, "flat RVE, g = 0.005: max in-plane |u| / H", || flat_run().map(|e| e.in_plane));
    r.run("fem.prebuckling_oracle", 1e-6, "u_z vs scalar per-layer oracle, relative", || flat_run().map(|e| e.vertical));
    r.run("fem.prebuckling_pressure", 1e-6, "per-layer pressure spread and oracle gap, relative", || {
        flat_run().map(|e| e.pressure_spread.max(e.pressure_oracle))
    });
    r.run("fem.quasi_incompressibility", 2e-3, "max |θ − 1| on the flat RVE at two refinements", || {
        let mut worst = 0.0f64;
        for k in 1..=2 {
            worst = worst.max(prebuckling_errors(&prebuckling_box(k), 100.0, 0.008)?.max_dilatation);
        }
        Ok(worst)
    });
    r.run("analysis.energy_additivity", 1e-10, "layer totals vs potential and vs per-cell sums", || {
        Ok(energy_additivity_error(11))
    });
    r.run("solver.dense_oracle", 1e-12, "SPD 5×5 vs dense elimination", || Ok(linear_solver_error()));
    r.run("analysis.wavelength_synthetic", 1.0, "single-mode fields, error in sample spacings", || {
        Ok(wavelength_error())
    });
    r.run("analysis.detector_synthetic", 0.0, "constructed divergence step vs detected step", || Ok(detector_error()));
    r.at_least("solver.perturbation_eccentric", 1.0, "degrees between load resultant and nearest symmetry plane", || {
        perturbation_eccentricity()
    });

    let passed = r.checks.iter().all(|c| c.passed);
    VerifyReport { passed, checks: r.checks }
}
