//! Point-level constitutive model for grown, fiber-reinforced neo-Hookean solids.
//!
//! The deformation gradient splits as `F = Fe · Fg`. All energies are functions of the elastic
//! part only:
//!
//! ```text
//! ψ_vol = λ/2 (Je − 1)²
//! ψ_iso = μ0/2 (I1e − 2 ln Je − 3)
//! ψ_ani = μf (I4e − 1)²          (⟨I4e − 1⟩² when fibers are tension-only)
//! ```
//!
//! [`evaluate`] returns Kirchhoff stresses and spatial (Lie-derivative) moduli; it is the path
//! the element kernel uses. [`evaluate_lagrangian`] and [`total_pullback`] produce the same
//! response in the intermediate and reference configurations and exist as a cross-check.

use crate::error::MaterialError;
use crate::tensor::{push_forward_moduli, push_forward_stress, Tensor2, Tensor4, Vec3};

/// Per-layer constitutive constants.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MaterialParams {
    /// Shear modulus μ0.
    pub mu0: f64,
    /// Volumetric penalty modulus λ.
    pub penalty_lambda: f64,
    /// Fiber stiffness μf. Zero disables the anisotropic term.
    pub mu_fiber: f64,
    /// Reference fiber direction (unit).
    pub n0: Vec3,
    /// Fibers carry no compression when set.
    pub tension_only: bool,
}

impl MaterialParams {
    /// Stiff film of the bilayer study: μ = 100, κ = 1e5, fibers along y.
    pub fn film(mu_fiber: f64) -> Self {
        MaterialParams {
            mu0: 100.0,
            penalty_lambda: 1.0e5,
            mu_fiber,
            n0: Vec3::new(0.0, 1.0, 0.0),
            tension_only: false,
        }
    }

    /// Compliant substrate: μ = 1, κ = 1e3, no fibers.
    pub fn substrate() -> Self {
        MaterialParams {
            mu0: 1.0,
            penalty_lambda: 1.0e3,
            mu_fiber: 0.0,
            n0: Vec3::new(0.0, 1.0, 0.0),
            tension_only: false,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        use alloc::format;
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return Err(MaterialError::InvalidParameter {
                field: "mu0",
                reason: format!("must be > 0, got {}", self.mu0),
            });
        }
        if !(self.penalty_lambda > 0.0 && self.penalty_lambda.is_finite()) {
            return Err(MaterialError::InvalidParameter {
                field: "penalty_lambda",
                reason: format!("must be > 0, got {}", self.penalty_lambda),
            });
        }
        if !(self.mu_fiber >= 0.0 && self.mu_fiber.is_finite()) {
            return Err(MaterialError::InvalidParameter {
                field: "mu_fiber",
                reason: format!("must be >= 0, got {}", self.mu_fiber),
            });
        }
        if libm::fabs(self.n0.norm() - 1.0) > 1e-12 {
            return Err(MaterialError::InvalidParameter {
                field: "n0",
                reason: format!("must be a unit vector, |n0| = {}", self.n0.norm()),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GrowthKind {
    /// `Fg = (1 + g) I`
    Isotropic,
    /// `Fg = (1 + g) I − g m0 ⊗ m0`: in-plane growth, none along the membrane normal.
    Planar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthSpec {
    pub kind: GrowthKind,
    pub g: f64,
    /// Membrane normal, only read for planar growth.
    pub m0: Vec3,
}

impl GrowthSpec {
    pub fn isotropic(g: f64) -> Self {
        GrowthSpec { kind: GrowthKind::Isotropic, g, m0: Vec3::new(0.0, 0.0, 1.0) }
    }

    pub fn planar(g: f64, m0: Vec3) -> Self {
        GrowthSpec { kind: GrowthKind::Planar, g, m0 }
    }

    pub fn with_g(&self, g: f64) -> Self {
        GrowthSpec { g, ..*self }
    }

    fn check(&self) -> Result<(), MaterialError> {
        if !(1.0 + self.g > 0.0) || !self.g.is_finite() {
            return Err(MaterialError::InvalidGrowth { g: self.g });
        }
        if self.kind == GrowthKind::Planar && libm::fabs(self.m0.norm() - 1.0) > 1e-12 {
            return Err(MaterialError::InvalidParameter {
                field: "m0",
                reason: alloc::format!("must be a unit vector, |m0| = {}", self.m0.norm()),
            });
        }
        Ok(())
    }
}

pub fn make_growth_tensor(spec: &GrowthSpec) -> Result<Tensor2, MaterialError> {
    spec.check()?;
    let g = spec.g;
    Ok(match spec.kind {
        GrowthKind::Isotropic => Tensor2::identity().scale(1.0 + g),
        GrowthKind::Planar => Tensor2::identity().scale(1.0 + g) - spec.m0.outer(&spec.m0).scale(g),
    })
}

/// `Fg⁻¹` by direct inversion of [`make_growth_tensor`].
pub fn inverse_growth_tensor(spec: &GrowthSpec) -> Result<Tensor2, MaterialError> {
    let fg = make_growth_tensor(spec)?;
    fg.inv().map_err(|_| MaterialError::InvalidGrowth { g: spec.g })
}

/// Elastic kinematics at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicState {
    pub f: Tensor2,
    pub fg: Tensor2,
    pub fe: Tensor2,
    pub ce: Tensor2,
    pub je: f64,
    pub i1e: f64,
    pub i4e: f64,
    /// Convected fiber `Fe · n0`.
    pub n_spatial: Vec3,
    /// Reference fiber direction the invariants were computed with.
    pub n0: Vec3,
}

/// Splits `F` into elastic and growth parts for the given growth law.
pub fn elastic_decompose(f: &Tensor2, spec: &GrowthSpec, n0: &Vec3) -> Result<KinematicState, MaterialError> {
    let fg = make_growth_tensor(spec)?;
    let fg_inv = inverse_growth_tensor(spec)?;
    elastic_decompose_with(f, &fg, &fg_inv, n0)
}

/// Same as [`elastic_decompose`] with a precomputed growth tensor and its inverse.
pub fn elastic_decompose_with(
    f: &Tensor2,
    fg: &Tensor2,
    fg_inv: &Tensor2,
    n0: &Vec3,
) -> Result<KinematicState, MaterialError> {
    let det_f = f.det();
    let fe = f.dot(fg_inv);
    let je = fe.det();
    if !(det_f > 0.0) || !(je > 0.0) {
        return Err(MaterialError::NonPositiveJacobian { det_f, det_fe: je });
    }
    let ce = fe.transpose().dot(&fe);
    let n_spatial = fe.mul_vec(n0);
    Ok(KinematicState {
        f: *f,
        fg: *fg,
        fe,
        ce,
        je,
        i1e: ce.trace(),
        i4e: n_spatial.dot(&n_spatial),
        n_spatial,
        n0: *n0,
    })
}

/// Energies, Kirchhoff stress parts and spatial moduli parts at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressModuli {
    pub tau_vol: Tensor2,
    pub tau_iso: Tensor2,
    pub tau_ani: Tensor2,
    pub c_vol: Tensor4,
    pub c_iso: Tensor4,
    pub c_ani: Tensor4,
    pub psi_vol: f64,
    pub psi_iso: f64,
    pub psi_ani: f64,
}

impl StressModuli {
    pub fn tau(&self) -> Tensor2 {
        self.tau_vol + self.tau_iso + self.tau_ani
    }

    pub fn moduli(&self) -> Tensor4 {
        self.c_vol + self.c_iso + self.c_ani
    }

    pub fn psi(&self) -> f64 {
        self.psi_vol + self.psi_iso + self.psi_ani
    }
}

pub fn psi_vol(lambda: f64, j: f64) -> f64 {
    0.5 * lambda * (j - 1.0) * (j - 1.0)
}

/// `ψ'_vol`
pub fn dpsi_vol(lambda: f64, j: f64) -> f64 {
    lambda * (j - 1.0)
}

#[inline]
fn fiber_strain(i4: f64, tension_only: bool) -> f64 {
    if tension_only && i4 < 1.0 {
        0.0
    } else {
        i4 - 1.0
    }
}

pub fn psi_ani(mu_fiber: f64, i4: f64, tension_only: bool) -> f64 {
    let e = fiber_strain(i4, tension_only);
    mu_fiber * e * e
}

/// `ψ'_ani`
pub fn dpsi_ani(mu_fiber: f64, i4: f64, tension_only: bool) -> f64 {
    2.0 * mu_fiber * fiber_strain(i4, tension_only)
}

/// `ψ''_ani`
pub fn d2psi_ani(mu_fiber: f64, i4: f64, tension_only: bool) -> f64 {
    if tension_only && i4 < 1.0 {
        0.0
    } else {
        2.0 * mu_fiber
    }
}

pub fn psi_iso(mu0: f64, i1e: f64, je: f64) -> f64 {
    0.5 * mu0 * (i1e - 2.0 * libm::log(je) - 3.0)
}

/// `τ_iso = μ0 (be − I)` with `be = Fe Feᵀ`.
pub fn tau_iso(mu0: f64, fe: &Tensor2) -> Tensor2 {
    let be = fe.dot(&fe.transpose());
    (be - Tensor2::identity()).scale(mu0)
}

/// Eulerian response. The volumetric tangent uses `κ̂ = Je² ψ''_vol = λ Je²`.
pub fn evaluate(params: &MaterialParams, kin: &KinematicState) -> StressModuli {
    let i = Tensor2::identity();
    let lam = params.penalty_lambda;
    let je = kin.je;

    let p = je * dpsi_vol(lam, je);
    let kappa_hat = lam * je * je;
    let ii = Tensor4::sym_identity();

    let n = &kin.n_spatial;
    let nn = n.outer(n);
    let ani_strain = fiber_strain(kin.i4e, params.tension_only);
    let ani_active = !(params.tension_only && kin.i4e < 1.0);

    StressModuli {
        tau_vol: i.scale(p),
        tau_iso: tau_iso(params.mu0, &kin.fe),
        tau_ani: nn.scale(4.0 * params.mu_fiber * ani_strain),
        c_vol: Tensor4::dyad(&i, &i).scale(p + kappa_hat) - ii.scale(2.0 * p),
        c_iso: ii.scale(2.0 * params.mu0),
        c_ani: if ani_active {
            Tensor4::quad_dyad(n).scale(8.0 * params.mu_fiber)
        } else {
            Tensor4::zeros()
        },
        psi_vol: psi_vol(lam, je),
        psi_iso: psi_iso(params.mu0, kin.i1e, je),
        psi_ani: psi_ani(params.mu_fiber, kin.i4e, params.tension_only),
    }
}

/// Elastic second Piola-Kirchhoff stress and moduli parts in the intermediate configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagrangianResponse {
    pub s_vol: Tensor2,
    pub s_iso: Tensor2,
    pub s_ani: Tensor2,
    pub cc_vol: Tensor4,
    pub cc_iso: Tensor4,
    pub cc_ani: Tensor4,
}

impl LagrangianResponse {
    pub fn s(&self) -> Tensor2 {
        self.s_vol + self.s_iso + self.s_ani
    }

    pub fn moduli(&self) -> Tensor4 {
        self.cc_vol + self.cc_iso + self.cc_ani
    }
}

pub fn evaluate_lagrangian(params: &MaterialParams, kin: &KinematicState) -> Result<LagrangianResponse, MaterialError> {
    let ce_inv = kin
        .ce
        .inv()
        .map_err(|_| MaterialError::NonPositiveJacobian { det_f: kin.f.det(), det_fe: kin.je })?;
    let lam = params.penalty_lambda;
    let je = kin.je;
    let pe = je * dpsi_vol(lam, je);
    let kappa_l = lam * je * je;
    let i_cinv = Tensor4::sym_product(&ce_inv, &ce_inv);
    let n0 = &kin.n0;
    let ani_strain = fiber_strain(kin.i4e, params.tension_only);
    let ani_active = !(params.tension_only && kin.i4e < 1.0);

    Ok(LagrangianResponse {
        s_vol: ce_inv.scale(pe),
        s_iso: (Tensor2::identity() - ce_inv).scale(params.mu0),
        s_ani: n0.outer(n0).scale(4.0 * params.mu_fiber * ani_strain),
        cc_vol: Tensor4::dyad(&ce_inv, &ce_inv).scale(pe + kappa_l) - i_cinv.scale(2.0 * pe),
        cc_iso: i_cinv.scale(2.0 * params.mu0),
        cc_ani: if ani_active {
            Tensor4::quad_dyad(n0).scale(8.0 * params.mu_fiber)
        } else {
            Tensor4::zeros()
        },
    })
}

/// Total reference-configuration stress and moduli: `S = Fg⁻¹ Se Fg⁻ᵀ` and
/// `ℂ = [Fg⁻¹ ⊗̄ Fg⁻¹] : ℂe : [Fg⁻ᵀ ⊗̄ Fg⁻ᵀ]`.
pub fn total_pullback(lag: &LagrangianResponse, spec: &GrowthSpec) -> Result<(Tensor2, Tensor4), MaterialError> {
    let fg_inv = inverse_growth_tensor(spec)?;
    Ok((push_forward_stress(&lag.s(), &fg_inv), push_forward_moduli(&lag.moduli(), &fg_inv)))
}
