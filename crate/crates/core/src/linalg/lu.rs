use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu as FaerLu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Col;

use super::multifrontal::{MultifrontalLu, SymbolicFronts};
use super::ordering::{equilibrate, PairedOrdering};
use super::{norm2, LinalgError, SparseMatrix};

/// Relative residual every accepted solve must satisfy.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;
const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_PIVOT: f64 = 1e-13;
/// Below this size the scalar native factorization is competitive; above it
/// the dense kernels of the multifrontal code win.
const AUTO_NATIVE_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Native for small systems, multifrontal otherwise.
    #[default]
    Auto,
    /// Left-looking LU with threshold partial pivoting.
    Native,
    /// Multifrontal LU over a symmetric ordering; see [`MultifrontalLu`].
    Multifrontal,
    /// Supernodal LU from `faer` with a column ordering of `AᵀA`. Robust for
    /// unsymmetric patterns but memory hungry on large saddle-point systems.
    Supernodal,
}

/// Left-looking sparse LU, `P A Q = L U`.
///
/// `Q` is an approximate minimum degree ordering of `A + Aᵀ`; rows are chosen
/// by threshold partial pivoting with a preference for the diagonal, which
/// keeps the ordering effective on structurally symmetric systems.
#[derive(Debug, Clone)]
pub struct NativeLu {
    n: usize,
    // L is unit lower triangular, diagonal stored first in each column.
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // U is upper triangular, diagonal stored last in each column.
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    pinv: Vec<usize>,
    q: Vec<usize>,
    // The factored matrix is diag(row_scale) A diag(col_scale).
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl NativeLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinalgError> {
        check_square(a)?;
        let n = a.n_rows();
        let (scaled, row_scale, col_scale) = equilibrate(a);
        let a = &scaled;
        let ordering = PairedOrdering::new(a)?;
        let q = ordering.scalar_order();
        let partner = ordering.partner;
        let at = a.transpose();
        // Columns of A are rows of Aᵀ.
        let (a_ptr, a_idx, a_val) = (at.row_offsets(), at.col_indices(), at.values());

        const UNSET: usize = usize::MAX;
        let mut pinv = vec![UNSET; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut u_ptr = Vec::with_capacity(n + 1);
        let cap = 4 * a.nnz() + n;
        let mut l_idx = Vec::with_capacity(cap);
        let mut l_val = Vec::with_capacity(cap);
        let mut u_idx = Vec::with_capacity(cap);
        let mut u_val = Vec::with_capacity(cap);

        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut marked = vec![false; n];

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = q[k];

            // Reach of column `col` in the graph of L, in topological order.
            let mut top = n;
            for p in a_ptr[col]..a_ptr[col + 1] {
                let i = a_idx[p];
                if !marked[i] {
                    top = dfs(i, &l_ptr, &l_idx, &pinv, top, &mut xi, &mut marked);
                }
            }
            for p in top..n {
                marked[xi[p]] = false;
            }

            // Sparse triangular solve x = L \ A(:, col).
            for p in top..n {
                x[xi[p]] = 0.0;
            }
            for p in a_ptr[col]..a_ptr[col + 1] {
                x[a_idx[p]] = a_val[p];
            }
            for p in top..n {
                let j = xi[p];
                let jp = pinv[j];
                if jp == UNSET {
                    continue;
                }
                let (s, e) = (l_ptr[jp], l_ptr[jp + 1]);
                let xj = x[j]; // unit diagonal
                for t in s + 1..e {
                    x[l_idx[t]] -= l_val[t] * xj;
                }
            }

            let mut ipiv = UNSET;
            let mut amax = -1.0f64;
            for p in top..n {
                let i = xi[p];
                if pinv[i] == UNSET {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            // Columns are equilibrated to unit max-norm, so an absolute
            // cutoff measures cancellation relative to the input.
            if ipiv == UNSET || !(amax > SINGULAR_PIVOT) || !amax.is_finite() {
                return Err(LinalgError::Singular { pivot: k });
            }
            // Prefer the diagonal, then the pair partner's row: a swap within
            // a pair is a 2×2 block pivot and keeps the ordering's structure.
            if let Some(&r) = [col, partner[col]]
                .iter()
                .find(|&&r| r != UNSET && pinv[r] == UNSET && x[r].abs() >= amax * PIVOT_THRESHOLD)
            {
                ipiv = r;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(1.0);
            for p in top..n {
                let i = xi[p];
                if pinv[i] == UNSET {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for i in l_idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(Self {
            n,
            l_ptr,
            l_idx,
            l_val,
            u_ptr,
            u_idx,
            u_val,
            pinv,
            q,
            row_scale,
            col_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries in `L` plus `U`.
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i] * self.row_scale[i];
        }
        for j in 0..n {
            let yj = y[j];
            for t in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                y[self.l_idx[t]] -= self.l_val[t] * yj;
            }
        }
        for j in (0..n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            for t in self.u_ptr[j]..last {
                y[self.u_idx[t]] -= self.u_val[t] * yj;
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.q[k]] = y[k] * self.col_scale[self.q[k]];
        }
        x
    }
}

/// Depth-first search from original row `start` through the columns of L
/// computed so far; pushes finished nodes onto `xi[..top]` from the right.
fn dfs(
    start: usize,
    l_ptr: &[usize],
    l_idx: &[usize],
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    marked: &mut [bool],
) -> usize {
    // (node, next position in its L column)
    let mut stack: Vec<(usize, usize)> = vec![(start, usize::MAX)];
    while let Some(last) = stack.len().checked_sub(1) {
        let (j, mut pos) = stack[last];
        let jp = pinv[j];
        if pos == usize::MAX {
            marked[j] = true;
            pos = if jp == usize::MAX { 0 } else { l_ptr[jp] + 1 };
        }
        let mut child = None;
        if jp != usize::MAX {
            let end = l_ptr[jp + 1];
            while pos < end {
                let i = l_idx[pos];
                pos += 1;
                if !marked[i] {
                    child = Some(i);
                    break;
                }
            }
        }
        stack[last].1 = pos;
        match child {
            Some(i) => stack.push((i, usize::MAX)),
            None => {
                stack.pop();
                top -= 1;
                xi[top] = j;
            }
        }
    }
    top
}

fn check_square(a: &SparseMatrix) -> Result<(), LinalgError> {
    if a.n_rows() != a.n_cols() {
        return Err(LinalgError::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    Ok(())
}

enum Inner {
    Native(NativeLu),
    Multifrontal(MultifrontalLu),
    // Factorization of Aᵀ (the CSR arrays read as CSC); solves use the transpose.
    Supernodal(FaerLu<usize, f64>),
}

/// A factorized matrix together with the matrix itself, for residual checks.
pub struct Factorization<'a> {
    a: &'a SparseMatrix,
    inner: Inner,
}

impl Factorization<'_> {
    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.inner {
            Inner::Native(lu) => lu.solve(b),
            Inner::Multifrontal(lu) => lu.solve(b),
            Inner::Supernodal(lu) => {
                let mut x = Col::<f64>::from_fn(b.len(), |i| b[i]);
                lu.solve_transpose_in_place(x.as_mat_mut());
                x.iter().copied().collect()
            }
        }
    }

    /// Solves `A x = b`, refining until the relative residual is below
    /// [`RESIDUAL_TOLERANCE`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.a.n_rows() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.a.n_rows(),
                got: b.len(),
            });
        }
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.raw_solve(b);
        let mut residual = f64::INFINITY;
        for step in 0..=REFINEMENT_STEPS {
            if x.iter().any(|v| !v.is_finite()) {
                break;
            }
            let ax = self.a.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            residual = norm2(&r) / bnorm;
            if residual <= RESIDUAL_TOLERANCE {
                return Ok(x);
            }
            if step == REFINEMENT_STEPS {
                break;
            }
            let dx = self.raw_solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        }
        Err(LinalgError::ResidualTooLarge {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        })
    }

    pub fn is_native(&self) -> bool {
        matches!(self.inner, Inner::Native(_))
    }
}

/// Direct solver that caches the symbolic analysis across matrices sharing
/// one sparsity pattern (as in Newton iterations).
#[derive(Default)]
pub struct LinearSolver {
    backend: Backend,
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    fronts: Option<(Vec<usize>, Vec<usize>, SymbolicFronts)>,
}

impl LinearSolver {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            symbolic: None,
            fronts: None,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn factor<'a>(&mut self, a: &'a SparseMatrix) -> Result<Factorization<'a>, LinalgError> {
        check_square(a)?;
        let backend = match self.backend {
            Backend::Auto if a.n_rows() <= AUTO_NATIVE_LIMIT => Backend::Native,
            Backend::Auto => Backend::Multifrontal,
            b => b,
        };
        match backend {
            Backend::Native => {
                return Ok(Factorization {
                    a,
                    inner: Inner::Native(NativeLu::factor(a)?),
                })
            }
            Backend::Multifrontal => return self.factor_multifrontal(a),
            _ => {}
        }
        let n = a.n_rows();
        let sym =
            SymbolicSparseColMatRef::new_checked(n, n, a.row_offsets(), None, a.col_indices());
        let reuse = matches!(&self.symbolic, Some((ro, ci, _)) if ro == a.row_offsets() && ci == a.col_indices());
        if !reuse {
            let s = SymbolicLu::try_new(sym).map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
            self.symbolic = Some((a.row_offsets().to_vec(), a.col_indices().to_vec(), s));
        }
        let symbolic = self.symbolic.as_ref().unwrap().2.clone();
        let mat = SparseColMatRef::new(sym, a.values());
        match FaerLu::try_new_with_symbolic(symbolic, mat) {
            Ok(lu) => Ok(Factorization {
                a,
                inner: Inner::Supernodal(lu),
            }),
            Err(e) => {
                if self.backend == Backend::Auto {
                    // The native path reports which pivot failed.
                    NativeLu::factor(a).map(|lu| Factorization {
                        a,
                        inner: Inner::Native(lu),
                    })
                } else {
                    Err(LinalgError::Backend(format!("{e:?}")))
                }
            }
        }
    }

    fn factor_multifrontal<'a>(
        &mut self,
        a: &'a SparseMatrix,
    ) -> Result<Factorization<'a>, LinalgError> {
        let reuse = matches!(&self.fronts, Some((ro, ci, _)) if ro == a.row_offsets() && ci == a.col_indices());
        if !reuse {
            let (scaled, _, _) = equilibrate(a);
            let s = SymbolicFronts::new(&scaled)?;
            self.fronts = Some((a.row_offsets().to_vec(), a.col_indices().to_vec(), s));
        }
        let symbolic = self.fronts.as_ref().unwrap().2.clone();
        match MultifrontalLu::factor_with(a, symbolic) {
            Ok(lu) => Ok(Factorization {
                a,
                inner: Inner::Multifrontal(lu),
            }),
            Err(_) if self.backend == Backend::Auto => {
                NativeLu::factor(a).map(|lu| Factorization {
                    a,
                    inner: Inner::Native(lu),
                })
            }
            Err(e) => Err(e),
        }
    }

    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let f = self.factor(a)?;
        match f.solve(b) {
            Ok(x) => Ok(x),
            Err(err) if self.backend == Backend::Auto && !f.is_native() => {
                // Pivoting restricted to fronts can break down silently on
                // singular or badly scaled input; retry natively, which also
                // gives a precise diagnosis.
                drop(f);
                NativeLu::factor(a)
                    .map(|lu| Factorization {
                        a,
                        inner: Inner::Native(lu),
                    })
                    .and_then(|f| f.solve(b))
                    .map_err(|native| match native {
                        LinalgError::Singular { .. } => native,
                        _ => err,
                    })
            }
            Err(err) => Err(err),
        }
    }
}

/// One-shot solve of `A x = b` with the automatic backend.
pub fn lu_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    LinearSolver::new(Backend::Auto).solve(a, b)
}
