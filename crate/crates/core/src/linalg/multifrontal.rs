//! Multifrontal LU for matrices with a (nearly) symmetric pattern.
//!
//! The elimination order comes from [`PairedOrdering`] on `A + Aᵀ`, and the
//! elimination tree is amalgamated into supernodes. Each front is a dense
//! matrix factored with partial pivoting restricted to its fully summed rows,
//! so the symbolic structure is fixed before any numbers are seen. A pivot
//! that would need a row from outside its front is taken from inside instead;
//! iterative refinement in the caller absorbs the (rare) loss of accuracy.

use dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::{lu_in_place, lu_in_place_scratch};
use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Accum, Mat, Par};

use super::ordering::{equilibrate, PairedOrdering, NONE};
use super::{LinalgError, SparseMatrix};

/// Consecutive elimination-tree nodes are merged while the front has at most
/// this many fully summed columns, even when that stores explicit zeros.
const RELAXED_COLUMNS: usize = 16;

/// Fronts, their row structure and the elimination order.
#[derive(Debug, Clone)]
pub struct SymbolicFronts {
    n: usize,
    /// `order[k]` is the original index eliminated at step `k`.
    order: Vec<usize>,
    inv: Vec<usize>,
    fronts: Vec<FrontShape>,
}

#[derive(Debug, Clone)]
struct FrontShape {
    /// Fully summed columns `first..first + k` (elimination indices).
    first: usize,
    k: usize,
    /// Remaining rows of the front, ascending elimination indices.
    rows: Vec<usize>,
    children: usize,
}

impl SymbolicFronts {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let mut ordering = PairedOrdering::new(a)?;
        let ng = ordering.groups.len();

        // Elimination tree of the quotient graph, then a postorder so that
        // every supernode is a contiguous range.
        let parent = etree(&ordering.adj_ptr, &ordering.adj_idx);
        let post = postorder(&parent);
        let mut post_inv = vec![0; ng];
        for (k, &g) in post.iter().enumerate() {
            post_inv[g] = k;
        }
        ordering.permute(&post, &post_inv);
        let parent: Vec<usize> = post
            .iter()
            .map(|&g| {
                if parent[g] == NONE {
                    NONE
                } else {
                    post_inv[parent[g]]
                }
            })
            .collect();

        let size = |g: usize| 1 + usize::from(ordering.groups[g][1] != NONE);
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); ng];
        for (g, &p) in parent.iter().enumerate() {
            if p != NONE {
                children[p].push(g);
            }
        }

        // Supernodes over groups: (first group, end group, row groups).
        let mut sn_of = vec![NONE; ng];
        let mut sns: Vec<(usize, usize, Vec<usize>, usize)> = Vec::new();
        let mut mark = vec![NONE; ng];
        for j in 0..ng {
            let mut structure: Vec<usize> = Vec::new();
            mark[j] = j;
            for &i in &ordering.adj_idx[ordering.adj_ptr[j]..ordering.adj_ptr[j + 1]] {
                if i > j && mark[i] != j {
                    mark[i] = j;
                    structure.push(i);
                }
            }
            for &c in &children[j] {
                for &i in &sns[sn_of[c]].2 {
                    if i > j && mark[i] != j {
                        mark[i] = j;
                        structure.push(i);
                    }
                }
            }
            structure.sort_unstable();
            let merge = j > 0 && parent[j - 1] == j && {
                let s = &sns[sn_of[j - 1]];
                s.2.len() == structure.len() + 1 || s.3 + size(j) <= RELAXED_COLUMNS
            };
            if merge {
                let s = sn_of[j - 1];
                sns[s].1 = j + 1;
                sns[s].2 = structure;
                sns[s].3 += size(j);
                sn_of[j] = s;
            } else {
                sn_of[j] = sns.len();
                sns.push((j, j + 1, structure, size(j)));
            }
        }

        let mut gstart = Vec::with_capacity(ng + 1);
        gstart.push(0);
        for g in 0..ng {
            gstart.push(gstart[g] + size(g));
        }
        let mut n_children = vec![0; sns.len()];
        for (_, end, _, _) in &sns {
            if parent[end - 1] != NONE {
                n_children[sn_of[parent[end - 1]]] += 1;
            }
        }
        let fronts = sns
            .iter()
            .zip(n_children)
            .map(|((first, end, rows, _), children)| FrontShape {
                first: gstart[*first],
                k: gstart[*end] - gstart[*first],
                rows: rows
                    .iter()
                    .flat_map(|&g| gstart[g]..gstart[g + 1])
                    .collect(),
                children,
            })
            .collect();

        let order = ordering.scalar_order();
        let n = order.len();
        let mut inv = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            inv[i] = k;
        }
        Ok(Self {
            n,
            order,
            inv,
            fronts,
        })
    }

    /// Entries of `L` plus `U` the numeric factorization will store.
    pub fn fill(&self) -> usize {
        self.fronts
            .iter()
            .map(|f| f.k * f.k + 2 * f.k * f.rows.len())
            .sum()
    }
}

/// Liu's algorithm with path compression, on a symmetric adjacency structure.
fn etree(ptr: &[usize], idx: &[usize]) -> Vec<usize> {
    let n = ptr.len() - 1;
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for j in 0..n {
        for &i in &idx[ptr[j]..ptr[j + 1]] {
            if i >= j {
                continue;
            }
            let mut r = i;
            while ancestor[r] != NONE && ancestor[r] != j {
                let next = ancestor[r];
                ancestor[r] = j;
                r = next;
            }
            if ancestor[r] == NONE {
                ancestor[r] = j;
                parent[r] = j;
            }
        }
    }
    parent
}

fn postorder(parent: &[usize]) -> Vec<usize> {
    let n = parent.len();
    let mut head = vec![NONE; n];
    let mut next = vec![NONE; n];
    // Reverse insertion keeps children in ascending order.
    for j in (0..n).rev() {
        if parent[j] != NONE {
            next[j] = head[parent[j]];
            head[parent[j]] = j;
        }
    }
    let mut post = Vec::with_capacity(n);
    let mut stack = Vec::new();
    for root in (0..n).filter(|&j| parent[j] == NONE) {
        stack.push(root);
        while let Some(&j) = stack.last() {
            let c = head[j];
            if c == NONE {
                stack.pop();
                post.push(j);
            } else {
                head[j] = next[c];
                stack.push(c);
            }
        }
    }
    post
}

#[derive(Debug, Clone)]
struct Front {
    /// `[L11\U11; L21]`, `m × k`.
    l: Mat<f64>,
    /// `U12`, `k × (m - k)`.
    u12: Mat<f64>,
    /// Row `i` of the pivoted front is fully summed row `perm[i]`.
    perm: Vec<usize>,
}

/// Numeric multifrontal factorization of `diag(rs) A diag(cs)`.
#[derive(Debug, Clone)]
pub struct MultifrontalLu {
    symbolic: SymbolicFronts,
    fronts: Vec<Front>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl MultifrontalLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let (scaled, _, _) = equilibrate(a);
        let symbolic = SymbolicFronts::new(&scaled)?;
        Self::factor_with(a, symbolic)
    }

    /// Numeric factorization reusing an analysis of a matrix with the same pattern.
    pub fn factor_with(a: &SparseMatrix, symbolic: SymbolicFronts) -> Result<Self, LinalgError> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(LinalgError::NotSquare {
                n_rows: n,
                n_cols: a.n_cols(),
            });
        }
        if symbolic.n != n {
            return Err(LinalgError::DimensionMismatch {
                expected: symbolic.n,
                got: n,
            });
        }
        let (s, row_scale, col_scale) = equilibrate(a);
        let st = s.transpose();
        let (order, inv) = (&symbolic.order, &symbolic.inv);

        let mut local = vec![NONE; n];
        let mut stack: Vec<(Vec<usize>, Mat<f64>)> = Vec::new();
        let mut fronts = Vec::with_capacity(symbolic.fronts.len());
        for shape in &symbolic.fronts {
            let (first, k) = (shape.first, shape.k);
            let end = first + k;
            let m = k + shape.rows.len();
            for c in first..end {
                local[c] = c - first;
            }
            for (i, &r) in shape.rows.iter().enumerate() {
                local[r] = k + i;
            }

            let mut f = Mat::<f64>::zeros(m, m);
            for c in first..end {
                let (rows, vals) = st.row(order[c]);
                for (&r, &v) in rows.iter().zip(vals) {
                    let lr = local[inv[r]];
                    if lr != NONE {
                        f[(lr, c - first)] += v;
                    }
                }
                let (cols, vals) = s.row(order[c]);
                for (&col, &v) in cols.iter().zip(vals) {
                    let j = inv[col];
                    if j >= end && local[j] != NONE {
                        f[(c - first, local[j])] += v;
                    }
                }
            }
            for _ in 0..shape.children {
                let (rows, cb) = stack.pop().expect("child contribution block");
                let map: Vec<usize> = rows.iter().map(|&r| local[r]).collect();
                for (jc, &lj) in map.iter().enumerate() {
                    for (ic, &li) in map.iter().enumerate() {
                        f[(li, lj)] += cb[(ic, jc)];
                    }
                }
            }
            for c in first..end {
                local[c] = NONE;
            }
            for &r in &shape.rows {
                local[r] = NONE;
            }

            let mut perm = vec![0usize; k];
            let mut perm_inv = vec![0usize; k];
            {
                let panel = f.as_mut().subrows_mut(0, k);
                let mut buf = MemBuffer::new(lu_in_place_scratch::<usize, f64>(
                    k,
                    m,
                    Par::Seq,
                    Default::default(),
                ));
                lu_in_place(
                    panel,
                    &mut perm,
                    &mut perm_inv,
                    Par::Seq,
                    MemStack::new(&mut buf),
                    Default::default(),
                );
            }
            for j in 0..k {
                let d = f[(j, j)];
                if !(d.abs() > 0.0) || !d.is_finite() {
                    return Err(LinalgError::Singular { pivot: first + j });
                }
            }
            let (f11, f12, f21, f22) = f.as_mut().split_at_mut(k, k);
            let mut f21 = f21;
            solve_lower_triangular_in_place(
                f11.as_ref().transpose(),
                f21.as_mut().transpose_mut(),
                Par::Seq,
            );
            matmul(f22, Accum::Add, f21.as_ref(), f12.as_ref(), -1.0, Par::Seq);

            if !shape.rows.is_empty() {
                stack.push((
                    shape.rows.clone(),
                    f.submatrix(k, k, m - k, m - k).to_owned(),
                ));
            }
            fronts.push(Front {
                l: f.subcols(0, k).to_owned(),
                u12: f.submatrix(0, k, k, m - k).to_owned(),
                perm,
            });
        }
        Ok(Self {
            symbolic,
            fronts,
            row_scale,
            col_scale,
        })
    }

    pub fn symbolic(&self) -> &SymbolicFronts {
        &self.symbolic
    }

    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn fill(&self) -> usize {
        self.symbolic.fill()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = &self.symbolic;
        let mut y: Vec<f64> = sym
            .order
            .iter()
            .map(|&i| b[i] * self.row_scale[i])
            .collect();
        let mut z = Vec::new();
        for (shape, front) in sym.fronts.iter().zip(&self.fronts) {
            let (first, k) = (shape.first, shape.k);
            z.clear();
            z.extend(front.perm.iter().map(|&p| y[first + p]));
            for j in 0..k {
                let zj = z[j];
                for i in j + 1..k {
                    z[i] -= front.l[(i, j)] * zj;
                }
                for (i, &r) in shape.rows.iter().enumerate() {
                    y[r] -= front.l[(k + i, j)] * zj;
                }
            }
            y[first..first + k].copy_from_slice(&z);
        }
        for (shape, front) in sym.fronts.iter().zip(&self.fronts).rev() {
            let (first, k) = (shape.first, shape.k);
            z.clear();
            z.extend_from_slice(&y[first..first + k]);
            for (jr, &r) in shape.rows.iter().enumerate() {
                let yr = y[r];
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi -= front.u12[(i, jr)] * yr;
                }
            }
            for j in (0..k).rev() {
                z[j] /= front.l[(j, j)];
                let zj = z[j];
                for i in 0..j {
                    z[i] -= front.l[(i, j)] * zj;
                }
            }
            y[first..first + k].copy_from_slice(&z);
        }
        let mut x = vec![0.0; sym.n];
        for (k, &i) in sym.order.iter().enumerate() {
            x[i] = y[k] * self.col_scale[i];
        }
        x
    }
}
