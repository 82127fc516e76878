//! The T2P0F0 element: quadratic displacements with element-constant dilatation/pressure and
//! fiber-stretch/fiber-stress pairs.
//!
//! The constant fields enter the element potential only through
//!
//! ```text
//! p (Je − θ) + ψ_vol(θ) + s (I4e − λ̄) + ψ_ani(λ̄)
//! ```
//!
//! so their stationarity conditions are solved in closed form per element: `θ` and `λ̄` are the
//! volume averages of `Je` and `I4e`, `p = ψ'_vol(θ)` and `s = ψ'_ani(λ̄)`. What remains is a
//! displacement-only potential
//!
//! ```text
//! πe(u) = ∫ ψ_iso dV + Ve [ψ_vol(θ(u)) + ψ_ani(λ̄(u))]
//! ```
//!
//! whose gradient and Hessian are [`element_residual`] and [`element_tangent`].
//!
//! Element dofs are node-major with xyz inside a node: dof `3 * a + i`.

use crate::error::MaterialError;
use crate::material::{
    d2psi_ani, dpsi_ani, dpsi_vol, elastic_decompose_with, inverse_growth_tensor, make_growth_tensor, psi_ani,
    psi_iso, psi_vol, tau_iso, GrowthSpec, KinematicState, MaterialParams,
};
use crate::mesh::TET_EDGES;
use crate::tensor::{Tensor2, Vec3};

pub const NODES: usize = 10;
pub const DOFS: usize = 30;
pub const QUAD_POINTS: usize = 11;

pub type ElementVector = [f64; DOFS];
pub type ElementMatrix = [[f64; DOFS]; DOFS];

/// Shape functions of the 10-node tetrahedron and an 11-point degree-4 quadrature rule.
#[derive(Clone, Debug)]
pub struct ReferenceElementT2 {
    /// Quadrature points in reference coordinates `(ξ, η, ζ)`.
    pub points: [Vec3; QUAD_POINTS],
    /// Weights on the reference tetrahedron (sum 1/6). The centroid weight is negative.
    pub weights: [f64; QUAD_POINTS],
    pub values: [[f64; NODES]; QUAD_POINTS],
    pub gradients: [[Vec3; NODES]; QUAD_POINTS],
}

impl Default for ReferenceElementT2 {
    fn default() -> Self {
        Self::new()
    }
}

const BARY_GRADS: [Vec3; 4] =
    [Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];

fn barycentric(xi: &Vec3) -> [f64; 4] {
    [1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]
}

impl ReferenceElementT2 {
    pub fn new() -> Self {
        // Keast's 11-point rule
        let a = (1.0 + libm::sqrt(5.0 / 14.0)) / 4.0;
        let b = (1.0 - libm::sqrt(5.0 / 14.0)) / 4.0;
        let c = 1.0 / 14.0;
        let d = 11.0 / 14.0;
        let points = [
            Vec3::new(0.25, 0.25, 0.25),
            Vec3::new(c, c, c),
            Vec3::new(d, c, c),
            Vec3::new(c, d, c),
            Vec3::new(c, c, d),
            Vec3::new(a, a, b),
            Vec3::new(a, b, a),
            Vec3::new(a, b, b),
            Vec3::new(b, a, a),
            Vec3::new(b, a, b),
            Vec3::new(b, b, a),
        ];
        let w0 = -74.0 / 5625.0;
        let w1 = 343.0 / 45000.0;
        let w2 = 56.0 / 2250.0;
        let weights = [w0, w1, w1, w1, w1, w2, w2, w2, w2, w2, w2];
        let mut values = [[0.0; NODES]; QUAD_POINTS];
        let mut gradients = [[Vec3::zero(); NODES]; QUAD_POINTS];
        for q in 0..QUAD_POINTS {
            values[q] = Self::shape(&points[q]);
            gradients[q] = Self::shape_gradients(&points[q]);
        }
        ReferenceElementT2 { points, weights, values, gradients }
    }

    pub fn shape(xi: &Vec3) -> [f64; NODES] {
        let l = barycentric(xi);
        let mut n = [0.0; NODES];
        for a in 0..4 {
            n[a] = l[a] * (2.0 * l[a] - 1.0);
        }
        for (e, &(a, b)) in TET_EDGES.iter().enumerate() {
            n[4 + e] = 4.0 * l[a] * l[b];
        }
        n
    }

    pub fn shape_gradients(xi: &Vec3) -> [Vec3; NODES] {
        let l = barycentric(xi);
        let mut g = [Vec3::zero(); NODES];
        for a in 0..4 {
            g[a] = BARY_GRADS[a].scale(4.0 * l[a] - 1.0);
        }
        for (e, &(a, b)) in TET_EDGES.iter().enumerate() {
            g[4 + e] = (BARY_GRADS[a].scale(l[b]) + BARY_GRADS[b].scale(l[a])).scale(4.0);
        }
        g
    }

    /// Reference coordinates of the ten nodes.
    pub fn node_coordinates() -> [Vec3; NODES] {
        let corners =
            [Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
        let mut x = [Vec3::zero(); NODES];
        x[..4].copy_from_slice(&corners);
        for (e, &(a, b)) in TET_EDGES.iter().enumerate() {
            x[4 + e] = (corners[a] + corners[b]).scale(0.5);
        }
        x
    }
}

/// Material gradients and integration weights of one affine cell.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    /// `∇X N_a` at each quadrature point.
    pub grads: [[Vec3; NODES]; QUAD_POINTS],
    /// `w_q det J`.
    pub jw: [f64; QUAD_POINTS],
    pub volume: f64,
}

impl CellGeometry {
    /// Returns `None` for degenerate or inverted cells.
    pub fn new(reference: &ReferenceElementT2, corners: &[Vec3; 4]) -> Option<CellGeometry> {
        let (e1, e2, e3) = (corners[1] - corners[0], corners[2] - corners[0], corners[3] - corners[0]);
        let jac = Tensor2([[e1[0], e2[0], e3[0]], [e1[1], e2[1], e3[1]], [e1[2], e2[2], e3[2]]]);
        let det = jac.det();
        if !(det > 0.0) {
            return None;
        }
        let jinv = jac.inv().ok()?;
        let mut grads = [[Vec3::zero(); NODES]; QUAD_POINTS];
        let mut jw = [0.0; QUAD_POINTS];
        for q in 0..QUAD_POINTS {
            for a in 0..NODES {
                grads[q][a] = jinv.tr_mul_vec(&reference.gradients[q][a]);
            }
            jw[q] = reference.weights[q] * det;
        }
        Some(CellGeometry { grads, jw, volume: det / 6.0 })
    }
}

/// Growth tensor and its inverse for one growth state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub fg: Tensor2,
    pub fg_inv: Tensor2,
}

impl Growth {
    pub fn new(spec: &GrowthSpec) -> Result<Growth, MaterialError> {
        Ok(Growth { fg: make_growth_tensor(spec)?, fg_inv: inverse_growth_tensor(spec)? })
    }

    pub fn none() -> Growth {
        Growth { fg: Tensor2::identity(), fg_inv: Tensor2::identity() }
    }
}

/// Condensed element-constant fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixedElementState {
    /// Dilatation, volume average of `Je`.
    pub theta: f64,
    /// Pressure-like multiplier `ψ'_vol(θ)`.
    pub p: f64,
    /// Fiber stretch measure, volume average of `I4e`.
    pub lambda_bar: f64,
    /// Fiber stress multiplier `ψ'_ani(λ̄)`.
    pub s: f64,
}

/// Stored energy of one element split by part.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ElementEnergy {
    pub iso: f64,
    pub vol: f64,
    pub ani: f64,
}

impl ElementEnergy {
    pub fn total(&self) -> f64 {
        self.iso + self.vol + self.ani
    }
}

#[derive(Clone, Debug)]
pub struct ElementOutput {
    pub residual: ElementVector,
    pub tangent: Option<ElementMatrix>,
    pub mixed: MixedElementState,
    pub energy: ElementEnergy,
}

/// `F = I + Σ_a u_a ⊗ ∇X N_a` at quadrature point `q`.
pub fn element_kinematics(geom: &CellGeometry, u: &[Vec3; NODES], q: usize) -> Tensor2 {
    let mut f = Tensor2::identity();
    for a in 0..NODES {
        let g = &geom.grads[q][a];
        for i in 0..3 {
            for j in 0..3 {
                f.0[i][j] += u[a][i] * g[j];
            }
        }
    }
    f
}

fn point_states(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
) -> Result<[KinematicState; QUAD_POINTS], MaterialError> {
    let mut out = [None; QUAD_POINTS];
    for (q, slot) in out.iter_mut().enumerate() {
        let f = element_kinematics(geom, u, q);
        *slot = Some(elastic_decompose_with(&f, &growth.fg, &growth.fg_inv, &params.n0)?);
    }
    Ok(out.map(|s| s.expect("every quadrature point evaluated")))
}

fn condense(geom: &CellGeometry, kin: &[KinematicState; QUAD_POINTS], params: &MaterialParams) -> MixedElementState {
    let mut theta = 0.0;
    let mut lambda_bar = 0.0;
    let mut vol = 0.0;
    for q in 0..QUAD_POINTS {
        theta += geom.jw[q] * kin[q].je;
        lambda_bar += geom.jw[q] * kin[q].i4e;
        vol += geom.jw[q];
    }
    theta /= vol;
    lambda_bar /= vol;
    MixedElementState {
        theta,
        p: dpsi_vol(params.penalty_lambda, theta),
        lambda_bar,
        s: dpsi_ani(params.mu_fiber, lambda_bar, params.tension_only),
    }
}

/// Closed-form stationary values of the element-constant fields.
pub fn condense_mixed_fields(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
) -> Result<MixedElementState, MaterialError> {
    let kin = point_states(geom, u, params, growth)?;
    Ok(condense(geom, &kin, params))
}

/// Condensed element potential `πe(u)`.
pub fn element_potential(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
) -> Result<f64, MaterialError> {
    let kin = point_states(geom, u, params, growth)?;
    let m = condense(geom, &kin, params);
    let iso: f64 = (0..QUAD_POINTS).map(|q| geom.jw[q] * psi_iso(params.mu0, kin[q].i1e, kin[q].je)).sum();
    Ok(iso
        + geom.volume
            * (psi_vol(params.penalty_lambda, m.theta) + psi_ani(params.mu_fiber, m.lambda_bar, params.tension_only)))
}

/// Residual, optional tangent, condensed fields and energies in one pass.
pub fn evaluate_element(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
    with_tangent: bool,
) -> Result<ElementOutput, MaterialError> {
    let kin = point_states(geom, u, params, growth)?;
    let mixed = condense(geom, &kin, params);
    let mut residual = [0.0; DOFS];
    let mut tangent = if with_tangent { Some([[0.0; DOFS]; DOFS]) } else { None };
    let mut b_vol = [0.0; DOFS];
    let mut b_ani = [0.0; DOFS];
    let mut iso_energy = 0.0;
    let mut quad_volume = 0.0;
    let identity = Tensor2::identity();

    for q in 0..QUAD_POINTS {
        let k = &kin[q];
        let jw = geom.jw[q];
        quad_volume += jw;
        iso_energy += jw * psi_iso(params.mu0, k.i1e, k.je);

        let n = k.n_spatial;
        let pj = mixed.p * k.je;
        let sigma = tau_iso(params.mu0, &k.fe) + identity.scale(pj) + n.outer(&n).scale(2.0 * mixed.s);

        // spatial gradients ∇x N_a = F⁻ᵀ ∇X N_a
        let f_inv = k.f.inv().map_err(|_| MaterialError::NonPositiveJacobian { det_f: k.f.det(), det_fe: k.je })?;
        let mut gx = [Vec3::zero(); NODES];
        for a in 0..NODES {
            gx[a] = f_inv.tr_mul_vec(&geom.grads[q][a]);
        }

        for a in 0..NODES {
            let sg = sigma.mul_vec(&gx[a]);
            let ng = n.dot(&gx[a]);
            for i in 0..3 {
                residual[3 * a + i] += jw * sg[i];
                b_vol[3 * a + i] += jw * k.je * gx[a][i];
                b_ani[3 * a + i] += jw * 2.0 * ng * n[i];
            }
        }

        if let Some(kt) = tangent.as_mut() {
            // local moduli: 2μ0 𝕀 + pJe (I ⊗ I − 2 𝕀); the fiber term has no local part
            let alpha = 2.0 * params.mu0 - 2.0 * pj;
            let half_alpha = 0.5 * alpha;
            for a in 0..NODES {
                let ga = gx[a];
                let sga = sigma.mul_vec(&ga);
                for b in 0..NODES {
                    let gb = gx[b];
                    let diag = half_alpha * ga.dot(&gb) + sga.dot(&gb);
                    for i in 0..3 {
                        let row = &mut kt[3 * a + i];
                        for kk in 0..3 {
                            let mut v = half_alpha * ga[kk] * gb[i] + pj * ga[i] * gb[kk];
                            if i == kk {
                                v += diag;
                            }
                            row[3 * b + kk] += jw * v;
                        }
                    }
                }
            }
        }
    }

    if let Some(kt) = tangent.as_mut() {
        let vol_coef = params.penalty_lambda / quad_volume;
        let ani_coef = d2psi_ani(params.mu_fiber, mixed.lambda_bar, params.tension_only) / quad_volume;
        for r in 0..DOFS {
            for c in 0..DOFS {
                kt[r][c] += vol_coef * b_vol[r] * b_vol[c] + ani_coef * b_ani[r] * b_ani[c];
            }
        }
    }

    Ok(ElementOutput {
        residual,
        tangent,
        mixed,
        energy: ElementEnergy {
            iso: iso_energy,
            vol: quad_volume * psi_vol(params.penalty_lambda, mixed.theta),
            ani: quad_volume * psi_ani(params.mu_fiber, mixed.lambda_bar, params.tension_only),
        },
    })
}

pub fn element_residual(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
) -> Result<ElementVector, MaterialError> {
    Ok(evaluate_element(geom, u, params, growth, false)?.residual)
}

pub fn element_tangent(
    geom: &CellGeometry,
    u: &[Vec3; NODES],
    params: &MaterialParams,
    growth: &Growth,
) -> Result<ElementMatrix, MaterialError> {
    Ok(evaluate_element(geom, u, params, growth, true)?.tangent.expect("tangent requested"))
}
