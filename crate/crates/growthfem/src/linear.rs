//! Sparse symmetric direct solves (supernodal LDLᵀ with AMD ordering, via faer).

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};
use growthfem_core::assembly::SymmetricCsc;

use crate::error::SolverError;

/// Relative residual `‖Kx − r‖ / ‖r‖` a strict solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 3;

/// Direct solver that keeps the symbolic analysis of one sparsity pattern across solves.
pub struct LinearSolver {
    symbolic: Option<Analysis>,
    /// Solutions whose relative residual stays above this after refinement are rejected as
    /// singular.
    pub tolerance: f64,
    /// Negative pivots of `D` in the last factorization (below `−PIVOT_NOISE·max|d|`). A
    /// positive count means the matrix is indefinite.
    pub last_negative: usize,
    /// Factor values of the last factorization.
    factor: Option<Vec<f64>>,
}

/// Pivots within this fraction of the largest one are treated as zero, not negative.
pub const PIVOT_NOISE: f64 = 1e-12;

struct Analysis {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    symbolic: SymbolicCholesky<usize>,
    /// Position of each pivot of `D` inside the factor values.
    pivots: Vec<usize>,
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver { symbolic: None, tolerance: SOLVE_TOLERANCE, last_negative: 0, factor: None }
    }
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("analysed", &self.symbolic.is_some())
            .field("tolerance", &self.tolerance)
            .field("last_negative", &self.last_negative)
            .finish()
    }
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        LinearSolver { tolerance, ..Default::default() }
    }

    fn analysis_for<'a>(slot: &'a mut Option<Analysis>, k: &SymmetricCsc) -> Result<&'a Analysis, SolverError> {
        let reuse = matches!(&*slot, Some(a) if a.col_ptr == k.col_ptr && a.row_idx == k.row_idx);
        if !reuse {
            let pattern = SymbolicSparseColMatRef::new_checked(k.n, k.n, &k.col_ptr, None, &k.row_idx);
            let symbolic =
                factorize_symbolic_cholesky(pattern, Side::Lower, SymmetricOrdering::Amd, Default::default())
                    .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
            let pivots = pivot_positions(&symbolic);
            *slot = Some(Analysis { col_ptr: k.col_ptr.clone(), row_idx: k.row_idx.clone(), symbolic, pivots });
        }
        Ok(slot.as_ref().expect("symbolic analysis present"))
    }

    /// Pivots of `D` in `K = L D Lᵀ` (fill-reducing order).
    pub fn pivots(&mut self, k: &SymmetricCsc) -> Result<Vec<f64>, SolverError> {
        let analysis = Self::analysis_for(&mut self.symbolic, k)?;
        let l_values = factorize(analysis, k)?;
        Ok(analysis.pivots.iter().map(|&i| l_values[i]).collect())
    }

    /// Solves `K x = r` for symmetric `K` stored as its lower triangle.
    pub fn solve(&mut self, k: &SymmetricCsc, r: &[f64]) -> Result<Vec<f64>, SolverError> {
        assert_eq!(k.n, r.len(), "right-hand side length must match the matrix");
        let n = k.n;
        if n == 0 {
            return Ok(Vec::new());
        }
        if k.values.iter().any(|v| !v.is_finite()) || r.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite);
        }
        self.factor = None;
        let analysis = Self::analysis_for(&mut self.symbolic, k)?;
        let symbolic = &analysis.symbolic;
        let l_values = factorize(analysis, k)?;
        let par = Par::Seq;
        let mut mem = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, par));

        let largest = analysis.pivots.iter().map(|&i| l_values[i].abs()).fold(0.0, f64::max);
        self.last_negative = analysis.pivots.iter().filter(|&&i| l_values[i] < -PIVOT_NOISE * largest).count();
        let ldlt = LdltRef::new(symbolic, &l_values);

        let r_norm = norm(r);
        let mut x = r.to_vec();
        ldlt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut x, n, 1), par, MemStack::new(&mut mem));
        let mut rel = f64::INFINITY;
        for step in 0..=REFINEMENT_STEPS {
            let kx = k.mul_vec(&x);
            let mut res: Vec<f64> = r.iter().zip(&kx).map(|(a, b)| a - b).collect();
            if res.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
                return Err(SolverError::SingularSystem("non-finite solution".into()));
            }
            rel = if r_norm > 0.0 { norm(&res) / r_norm } else { norm(&res) };
            if rel <= SOLVE_TOLERANCE || step == REFINEMENT_STEPS {
                break;
            }
            ldlt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut res, n, 1), par, MemStack::new(&mut mem));
            for (xi, di) in x.iter_mut().zip(&res) {
                *xi += di;
            }
        }
        self.factor = Some(l_values);
        if rel <= self.tolerance {
            return Ok(x);
        }
        Err(SolverError::SingularSystem(format!("relative residual {rel:e} after refinement")))
    }

    /// Direction of negative curvature of the last factorized matrix, or `None` when it had no
    /// negative pivot. With `K = L D Lᵀ`, the negative pivots are shrunk towards zero and `b` is
    /// solved against the modified factor; the result is dominated by the vectors `L⁻ᵀ eᵢ` of
    /// the negative pivots `dᵢ`, each with curvature `dᵢ`.
    pub fn negative_curvature(&self, b: &[f64]) -> Option<Vec<f64>> {
        let (analysis, factor) = (self.symbolic.as_ref()?, self.factor.as_ref()?);
        if self.last_negative == 0 {
            return None;
        }
        let mut l_values = factor.clone();
        let largest = analysis.pivots.iter().map(|&i| l_values[i].abs()).fold(0.0, f64::max);
        for &i in &analysis.pivots {
            let d = l_values[i];
            l_values[i] = if d < -PIVOT_NOISE * largest { d * 1e-6 } else { d.abs().max(PIVOT_NOISE * largest) };
        }
        let symbolic = &analysis.symbolic;
        let mut mem = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        let mut x = b.to_vec();
        LdltRef::new(symbolic, &l_values).solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(&mut x, b.len(), 1),
            Par::Seq,
            MemStack::new(&mut mem),
        );
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

fn factorize(analysis: &Analysis, k: &SymmetricCsc) -> Result<Vec<f64>, SolverError> {
    let symbolic = &analysis.symbolic;
    let pattern = SymbolicSparseColMatRef::new_checked(k.n, k.n, &k.col_ptr, None, &k.row_idx);
    let a = SparseColMatRef::new(pattern, &k.values);
    let par = Par::Seq;
    let mut l_values = vec![0.0f64; symbolic.len_val()];
    let mut mem = MemBuffer::new(symbolic.factorize_numeric_ldlt_scratch::<f64>(par, Default::default()));
    symbolic
        .factorize_numeric_ldlt(&mut l_values, a, Side::Lower, Default::default(), par, MemStack::new(&mut mem), Default::default())
        .map_err(|e| SolverError::SingularSystem(format!("{e:?}")))?;
    Ok(l_values)
}

/// Indices of the diagonal of `D` in the factor value array.
fn pivot_positions(symbolic: &SymbolicCholesky<usize>) -> Vec<usize> {
    match symbolic.raw() {
        SymbolicCholeskyRaw::Simplicial(s) => s.col_ptr()[..s.ncols()].to_vec(),
        SymbolicCholeskyRaw::Supernodal(s) => {
            let mut out = Vec::with_capacity(s.ncols());
            for i in 0..s.n_supernodes() {
                let ncols = s.supernode_end()[i] - s.supernode_begin()[i];
                let nrows = ncols + s.nnz_per_super()[i];
                let base = s.col_ptr_for_val()[i];
                out.extend((0..ncols).map(|j| base + j * nrows + j));
            }
            out
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One-off solve without reusing the symbolic analysis.
pub fn linear_solve(k: &SymmetricCsc, r: &[f64]) -> Result<Vec<f64>, SolverError> {
    LinearSolver::new().solve(k, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_dense(d: &[Vec<f64>]) -> SymmetricCsc {
        let n = d.len();
        let mut entries = Vec::new();
        for c in 0..n {
            for r in c..n {
                if d[r][c] != 0.0 || r == c {
                    entries.push((r, c));
                }
            }
        }
        let mut k = SymmetricCsc::from_pattern(n, entries);
        for c in 0..n {
            for p in k.col_ptr[c]..k.col_ptr[c + 1] {
                k.values[p] = d[k.row_idx[p]][c];
            }
        }
        k
    }

    #[test]
    fn identity_returns_rhs() {
        let d: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let r = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(linear_solve(&from_dense(&d), &r).unwrap(), r.to_vec());
    }

    #[test]
    fn spd_matches_dense_elimination() {
        let d = vec![
            vec![4.0, 1.0, 0.0, 0.5, 0.0],
            vec![1.0, 5.0, 2.0, 0.0, 0.0],
            vec![0.0, 2.0, 6.0, 1.0, 0.3],
            vec![0.5, 0.0, 1.0, 3.0, 0.0],
            vec![0.0, 0.0, 0.3, 0.0, 2.0],
        ];
        let r = [1.0, 2.0, 3.0, 4.0, 5.0];
        let x = linear_solve(&from_dense(&d), &r).unwrap();
        // Gaussian elimination with partial pivoting
        let n = 5;
        let mut a: Vec<Vec<f64>> = d.iter().zip(r).map(|(row, b)| row.iter().copied().chain([b]).collect()).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            for i in c + 1..n {
                let f = a[i][c] / a[c][c];
                for j in c..=n {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
        let mut oracle = vec![0.0; n];
        for i in (0..n).rev() {
            oracle[i] = (a[i][n] - (i + 1..n).map(|j| a[i][j] * oracle[j]).sum::<f64>()) / a[i][i];
        }
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_row_is_reported_singular() {
        let d = vec![vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert!(matches!(linear_solve(&from_dense(&d), &[1.0, 1.0, 1.0]), Err(SolverError::SingularSystem(_))));
    }

    #[test]
    fn indefinite_systems_are_solved() {
        let d = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let x = linear_solve(&from_dense(&d), &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
