//! Fixed-size 3D tensor algebra.
//!
//! Second-order tensors are stored row-major as `[[f64; 3]; 3]`, fourth-order tensors densely as
//! 81 entries with index `((i * 3 + j) * 3 + k) * 3 + l`. Symmetries of fourth-order tensors are
//! checked but never exploited; compressed layouts only exist inside the element kernel.
//!
//! The spatial and reference metrics are Cartesian, so they never appear explicitly.

use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::TensorError;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub const fn zero() -> Self {
        Vec3([0.0; 3])
    }

    /// Unit vector along the Cartesian axis `axis` (0, 1 or 2).
    pub fn unit(axis: usize) -> Self {
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    /// Dyadic product `self ⊗ other`.
    pub fn outer(&self, other: &Vec3) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[i] * other.0[j];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

/// Second-order tensor, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor2(pub [[f64; 3]; 3]);

impl Tensor2 {
    pub const fn zeros() -> Self {
        Tensor2([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Tensor2([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Tensor2([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Tensor2(rows)
    }

    pub fn transpose(&self) -> Tensor2 {
        let a = &self.0;
        Tensor2([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Cofactor expansion along the first row.
    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Inverse via the adjugate. Fails when `|det| <= 1e-14 * |A|^3`.
    pub fn inv(&self) -> Result<Tensor2, TensorError> {
        let a = &self.0;
        let det = self.det();
        let scale = self.norm();
        if !det.is_finite() || libm::fabs(det) <= 1e-14 * scale * scale * scale {
            return Err(TensorError::SingularTensor { det });
        }
        let r = 1.0 / det;
        Ok(Tensor2([
            [
                (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * r,
                (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * r,
                (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * r,
            ],
            [
                (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * r,
                (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * r,
                (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * r,
            ],
            [
                (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * r,
                (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * r,
                (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * r,
            ],
        ]))
    }

    /// Single contraction `self · other`.
    pub fn dot(&self, other: &Tensor2) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[i][0] * other.0[0][j]
                    + self.0[i][1] * other.0[1][j]
                    + self.0[i][2] * other.0[2][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let a = &self.0;
        Vec3([
            a[0][0] * v.0[0] + a[0][1] * v.0[1] + a[0][2] * v.0[2],
            a[1][0] * v.0[0] + a[1][1] * v.0[1] + a[1][2] * v.0[2],
            a[2][0] * v.0[0] + a[2][1] * v.0[1] + a[2][2] * v.0[2],
        ])
    }

    /// `self^T · v`
    pub fn tr_mul_vec(&self, v: &Vec3) -> Vec3 {
        let a = &self.0;
        Vec3([
            a[0][0] * v.0[0] + a[1][0] * v.0[1] + a[2][0] * v.0[2],
            a[0][1] * v.0[0] + a[1][1] * v.0[1] + a[2][1] * v.0[2],
            a[0][2] * v.0[0] + a[1][2] * v.0[1] + a[2][2] * v.0[2],
        ])
    }

    /// Double contraction `A : B = A_ij B_ij`.
    pub fn ddot(&self, other: &Tensor2) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn sym(&self) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = 0.5 * (self.0[i][j] + self.0[j][i]);
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Tensor2 {
        let mut t = *self;
        t.0.iter_mut().flatten().for_each(|v| *v *= s);
        t
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.ddot(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let s = self.max_abs().max(1.0);
        (0..3).all(|i| (0..3).all(|j| libm::fabs(self.0[i][j] - self.0[j][i]) <= tol * s))
    }
}

impl Index<(usize, usize)> for Tensor2 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Tensor2 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(mut self, o: Tensor2) -> Tensor2 {
        self += o;
        self
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, o: Tensor2) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(mut self, o: Tensor2) -> Tensor2 {
        self -= o;
        self
    }
}

impl SubAssign for Tensor2 {
    fn sub_assign(&mut self, o: Tensor2) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= o.0[i][j];
            }
        }
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, s: f64) -> Tensor2 {
        self.scale(s)
    }
}

impl Mul<Tensor2> for Tensor2 {
    type Output = Tensor2;
    fn mul(self, o: Tensor2) -> Tensor2 {
        self.dot(&o)
    }
}

/// Dense fourth-order tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor4(pub [f64; 81]);

#[inline(always)]
const fn idx4(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl Default for Tensor4 {
    fn default() -> Self {
        Tensor4::zeros()
    }
}

impl Tensor4 {
    pub const fn zeros() -> Self {
        Tensor4([0.0; 81])
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[idx4(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.0[idx4(i, j, k, l)] = v;
    }

    fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Tensor4 {
        let mut t = Tensor4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.0[idx4(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Standard dyadic product `(A ⊗ B)_ijkl = A_ij B_kl`.
    pub fn dyad(a: &Tensor2, b: &Tensor2) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| a.0[i][j] * b.0[k][l])
    }

    /// Non-standard product `(A ⊗̄ B)_ijkl = A_ik B_jl`.
    pub fn nonstandard_product(a: &Tensor2, b: &Tensor2) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| a.0[i][k] * b.0[j][l])
    }

    /// Symmetrised product `½ (A_ik B_jl + A_il B_jk)`. With `A = B = X^{-1}` this is the
    /// fourth-order identity on symmetric tensors associated with the metric `X`.
    pub fn sym_product(a: &Tensor2, b: &Tensor2) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| 0.5 * (a.0[i][k] * b.0[j][l] + a.0[i][l] * b.0[j][k]))
    }

    /// Symmetric fourth-order identity `𝕀_ijkl = ½ (δ_ik δ_jl + δ_il δ_jk)`.
    pub fn sym_identity() -> Tensor4 {
        let i = Tensor2::identity();
        Tensor4::sym_product(&i, &i)
    }

    /// `(n ⊗ n ⊗ n ⊗ n)`
    pub fn quad_dyad(n: &Vec3) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| n.0[i] * n.0[j] * n.0[k] * n.0[l])
    }

    /// `(M : A)_ij = M_ijkl A_kl`
    pub fn contract(&self, a: &Tensor2) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.0[idx4(i, j, k, l)] * a.0[k][l];
                    }
                }
                t.0[i][j] = s;
            }
        }
        t
    }

    /// `(A : M)_kl = A_ij M_ijkl`
    pub fn left_contract(&self, a: &Tensor2) -> Tensor2 {
        let mut t = Tensor2::zeros();
        for k in 0..3 {
            for l in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += a.0[i][j] * self.0[idx4(i, j, k, l)];
                    }
                }
                t.0[k][l] = s;
            }
        }
        t
    }

    /// Double contraction of two fourth-order tensors, `(M : N)_ijkl = M_ijmn N_mnkl`.
    pub fn compose(&self, other: &Tensor4) -> Tensor4 {
        let mut t = Tensor4::zeros();
        for ij in 0..9 {
            for kl in 0..9 {
                let mut s = 0.0;
                for mn in 0..9 {
                    s += self.0[ij * 9 + mn] * other.0[mn * 9 + kl];
                }
                t.0[ij * 9 + kl] = s;
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Tensor4 {
        let mut t = *self;
        t.0.iter_mut().for_each(|v| *v *= s);
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
    }

    /// `M_ijkl = M_jikl = M_ijlk` within `tol` relative to the largest entry.
    pub fn has_minor_symmetry(&self, tol: f64) -> bool {
        let s = self.max_abs().max(f64::MIN_POSITIVE);
        let mut ok = true;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = self.get(i, j, k, l);
                        ok &= libm::fabs(v - self.get(j, i, k, l)) <= tol * s;
                        ok &= libm::fabs(v - self.get(i, j, l, k)) <= tol * s;
                    }
                }
            }
        }
        ok
    }

    /// `M_ijkl = M_klij` within `tol` relative to the largest entry.
    pub fn has_major_symmetry(&self, tol: f64) -> bool {
        let s = self.max_abs().max(f64::MIN_POSITIVE);
        (0..9).all(|ij| (0..9).all(|kl| libm::fabs(self.0[ij * 9 + kl] - self.0[kl * 9 + ij]) <= tol * s))
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, o: Tensor4) -> Tensor4 {
        self += o;
        self
    }
}

impl AddAssign for Tensor4 {
    fn add_assign(&mut self, o: Tensor4) {
        self.0.iter_mut().zip(o.0.iter()).for_each(|(a, b)| *a += b);
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, o: Tensor4) -> Tensor4 {
        self.0.iter_mut().zip(o.0.iter()).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(self, s: f64) -> Tensor4 {
        self.scale(s)
    }
}

/// `det(A)`
pub fn det(a: &Tensor2) -> f64 {
    a.det()
}

/// `A^{-1}`
pub fn inv(a: &Tensor2) -> Result<Tensor2, TensorError> {
    a.inv()
}

/// `(A ⊗̄ B)_ijkl = A_ik B_jl`
pub fn nonstandard_product(a: &Tensor2, b: &Tensor2) -> Tensor4 {
    Tensor4::nonstandard_product(a, b)
}

/// Kirchhoff-type push-forward `F · S · Fᵀ`.
pub fn push_forward_stress(s: &Tensor2, f: &Tensor2) -> Tensor2 {
    f.dot(s).dot(&f.transpose())
}

/// Pull-back `F⁻¹ · τ · F⁻ᵀ`.
pub fn pull_back_stress(tau: &Tensor2, f: &Tensor2) -> Result<Tensor2, TensorError> {
    let fi = f.inv()?;
    Ok(push_forward_stress(tau, &fi))
}

/// `m_ijkl = F_iA F_jB M_ABCD F_kC F_lD`, evaluated as four successive single-index transforms.
pub fn push_forward_moduli(m: &Tensor4, f: &Tensor2) -> Tensor4 {
    let f = &f.0;
    let mut a = Tensor4::zeros();
    // transform one index at a time: 4 * 81 * 3 flops instead of 81 * 81
    for i in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        s += f[i][p] * m.get(p, b, c, d);
                    }
                    a.set(i, b, c, d, s);
                }
            }
        }
    }
    let mut b2 = Tensor4::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        s += f[j][p] * a.get(i, p, c, d);
                    }
                    b2.set(i, j, c, d, s);
                }
            }
        }
    }
    let mut c2 = Tensor4::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        s += f[k][p] * b2.get(i, j, p, d);
                    }
                    c2.set(i, j, k, d, s);
                }
            }
        }
    }
    let mut out = Tensor4::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut s = 0.0;
                    for p in 0..3 {
                        s += f[l][p] * c2.get(i, j, k, p);
                    }
                    out.set(i, j, k, l, s);
                }
            }
        }
    }
    out
}

/// Inverse of [`push_forward_moduli`]: the same index map with `F⁻¹`.
pub fn pull_back_moduli(m: &Tensor4, f: &Tensor2) -> Result<Tensor4, TensorError> {
    Ok(push_forward_moduli(m, &f.inv()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut ChaCha8Rng) -> Tensor2 {
        let mut t = Tensor2::zeros();
        t.0.iter_mut().flatten().for_each(|v| *v = rng.random_range(-1.0..1.0));
        t
    }

    fn well_conditioned(rng: &mut ChaCha8Rng) -> Tensor2 {
        Tensor2::identity() + random_tensor(rng).scale(0.4)
    }

    fn random_t4(rng: &mut ChaCha8Rng) -> Tensor4 {
        let mut t = Tensor4::zeros();
        t.0.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        t
    }

    // Leibniz permutation sum.
    fn det_by_permutations(a: &Tensor2) -> f64 {
        const PERMS: [([usize; 3], f64); 6] = [
            ([0, 1, 2], 1.0),
            ([1, 2, 0], 1.0),
            ([2, 0, 1], 1.0),
            ([0, 2, 1], -1.0),
            ([2, 1, 0], -1.0),
            ([1, 0, 2], -1.0),
        ];
        PERMS.iter().map(|(p, s)| s * a.0[0][p[0]] * a.0[1][p[1]] * a.0[2][p[2]]).sum()
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&Tensor2::identity()), 1.0);
        assert!((det(&Tensor2::diag(1.1, 1.1, 1.0)) - 1.21).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = random_tensor(&mut rng);
            assert!((det(&a) - det_by_permutations(&a)).abs() <= 1e-14);
        }
    }

    #[test]
    fn det_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = random_tensor(&mut rng);
            let b = random_tensor(&mut rng);
            let lhs = det(&a.dot(&b));
            let rhs = det(&a) * det(&b);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-3));
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inv(&Tensor2::identity()).unwrap(), Tensor2::identity());
        let d = inv(&Tensor2::diag(2.0, 4.0, 5.0)).unwrap();
        assert_eq!(d, Tensor2::diag(0.5, 0.25, 0.2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = well_conditioned(&mut rng);
            let r = a.dot(&inv(&a).unwrap()) - Tensor2::identity();
            assert!(r.norm() <= 1e-12);
        }
    }

    #[test]
    fn singular_tensor_is_rejected() {
        let a = Tensor2::from_rows([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert!(matches!(inv(&a), Err(TensorError::SingularTensor { .. })));
        assert!(inv(&Tensor2::zeros()).is_err());
    }

    #[test]
    fn nonstandard_product_examples() {
        let i = Tensor2::identity();
        let ii = nonstandard_product(&i, &i);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let expect = if a == c && b == d { 1.0 } else { 0.0 };
                        assert_eq!(ii.get(a, b, c, d), expect);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (a, b, c) = (random_tensor(&mut rng), random_tensor(&mut rng), random_tensor(&mut rng));
            let lhs = nonstandard_product(&a, &b).contract(&c);
            let rhs = a.dot(&c).dot(&b.transpose());
            assert!((lhs - rhs).max_abs() <= 1e-13);
        }
        let (a, b) = (random_tensor(&mut rng), random_tensor(&mut rng));
        // (A ⊗̄ B)_1213 in 1-based indices is A_11 B_23
        assert_eq!(nonstandard_product(&a, &b).get(0, 1, 0, 2), a.0[0][0] * b.0[1][2]);
    }

    #[test]
    fn push_forward_stress_examples() {
        let i = Tensor2::identity();
        assert_eq!(push_forward_stress(&i, &i), i);
        assert_eq!(push_forward_stress(&i, &Tensor2::diag(2.0, 1.0, 1.0)), Tensor2::diag(4.0, 1.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let s = random_tensor(&mut rng).sym();
            let f = well_conditioned(&mut rng);
            assert!(push_forward_stress(&s, &f).is_symmetric(1e-14));
        }
    }

    #[test]
    fn push_forward_stress_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = well_conditioned(&mut rng);
        let (s1, s2) = (random_tensor(&mut rng), random_tensor(&mut rng));
        let lhs = push_forward_stress(&(s1.scale(2.0) + s2), &f);
        let rhs = push_forward_stress(&s1, &f).scale(2.0) + push_forward_stress(&s2, &f);
        assert!((lhs - rhs).max_abs() < 1e-13);
    }

    #[test]
    fn moduli_transport() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_t4(&mut rng);
        assert_eq!(push_forward_moduli(&m, &Tensor2::identity()), m);
        for _ in 0..50 {
            let m = random_t4(&mut rng);
            let f = well_conditioned(&mut rng);
            let back = pull_back_moduli(&push_forward_moduli(&m, &f), &f).unwrap();
            assert!((back - m).max_abs() <= 1e-12 * m.max_abs());

            // index-loop oracle for the compact transform
            let direct = Tensor4::nonstandard_product(&f, &f)
                .compose(&m)
                .compose(&Tensor4::nonstandard_product(&f.transpose(), &f.transpose()));
            assert!((direct - push_forward_moduli(&m, &f)).max_abs() <= 1e-12 * direct.max_abs());

            let a = random_tensor(&mut rng).sym();
            let b = random_tensor(&mut rng).sym();
            let sym = Tensor4::dyad(&a, &b) + Tensor4::sym_product(&a, &a);
            assert!(push_forward_moduli(&sym, &f).has_minor_symmetry(1e-13));
        }
    }
}
