//! Scaling and fill-reducing orderings shared by the direct solvers.

use dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;

use super::{LinalgError, SparseMatrix};

pub(crate) const NONE: usize = usize::MAX;

const EQUILIBRATION_SWEEPS: usize = 5;

/// Ruiz equilibration: alternately divides rows and columns by the square
/// root of their largest entry, driving every max-norm towards one.
///
/// Returns `diag(rs) A diag(cs)` together with `rs` and `cs`.
pub(crate) fn equilibrate(a: &SparseMatrix) -> (SparseMatrix, Vec<f64>, Vec<f64>) {
    let n = a.n_rows();
    let mut scaled = a.clone();
    let mut rs = vec![1.0; n];
    let mut cs = vec![1.0; n];
    let ptr = a.row_offsets().to_vec();
    let idx = a.col_indices().to_vec();
    let inv_sqrt = |m: f64| if m > 0.0 { 1.0 / m.sqrt() } else { 1.0 };
    for _ in 0..EQUILIBRATION_SWEEPS {
        let vals = scaled.values();
        let mut rmax = vec![0.0f64; n];
        let mut cmax = vec![0.0f64; n];
        for i in 0..n {
            for p in ptr[i]..ptr[i + 1] {
                let v = vals[p].abs();
                rmax[i] = rmax[i].max(v);
                cmax[idx[p]] = cmax[idx[p]].max(v);
            }
        }
        let dr: Vec<f64> = rmax.into_iter().map(inv_sqrt).collect();
        let dc: Vec<f64> = cmax.into_iter().map(inv_sqrt).collect();
        let vals = scaled.values_mut();
        for i in 0..n {
            for p in ptr[i]..ptr[i + 1] {
                vals[p] *= dr[i] * dc[idx[p]];
            }
        }
        rs.iter_mut().zip(&dr).for_each(|(s, d)| *s *= d);
        cs.iter_mut().zip(&dc).for_each(|(s, d)| *s *= d);
    }
    (scaled, rs, cs)
}

/// Symmetric ordering in which zero-diagonal rows travel with a partner.
///
/// Saddle-point systems carry zero diagonals. Each such row is paired with
/// an unpaired neighbour, preferring ones with a nonzero diagonal, and the two
/// are ordered as one node, neighbour first: eliminating the neighbour leaves
/// a nonzero Schur diagonal for the second member, and a solver that keeps
/// pairs together can always pivot within the pair.
pub(crate) struct PairedOrdering {
    /// Pairing partner of each index, or [`NONE`].
    pub partner: Vec<usize>,
    /// Groups (a pair, or a single index padded with [`NONE`]) in elimination order.
    pub groups: Vec<[usize; 2]>,
    /// Symmetric pattern of the quotient graph in the same order, without
    /// the diagonal, as compressed adjacency lists.
    pub adj_ptr: Vec<usize>,
    pub adj_idx: Vec<usize>,
}

impl PairedOrdering {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let n = a.n_rows();
        let (ptr, idx, val) = (a.row_offsets(), a.col_indices(), a.values());

        let weak: Vec<bool> = (0..n)
            .map(|i| {
                let row = ptr[i]..ptr[i + 1];
                let amax = row.clone().map(|p| val[p].abs()).fold(0.0, f64::max);
                let d: f64 = row.filter(|&p| idx[p] == i).map(|p| val[p].abs()).sum();
                d <= 1e-12 * amax
            })
            .collect();
        let has_strong: Vec<bool> = (0..n)
            .map(|i| (ptr[i]..ptr[i + 1]).any(|p| idx[p] != i && !weak[idx[p]] && val[p] != 0.0))
            .collect();
        let mut partner = vec![NONE; n];
        // Weak rows seeing only weak rows go first, so their partners are not
        // used up elsewhere: [[0, a], [a, 0]] is a valid 2×2 pivot (gradient
        // fields in a curl-curl block meet their multiplier this way).
        let free_weak =
            |j: usize, partner: &[usize]| weak[j] && (partner[j] == NONE || weak[partner[j]]);
        match_rows(
            ptr,
            idx,
            val,
            &mut partner,
            |i| weak[i] && !has_strong[i],
            free_weak,
        );
        match_rows(ptr, idx, val, &mut partner, |i| weak[i], |j, _| !weak[j]);
        match_rows(ptr, idx, val, &mut partner, |i| weak[i], free_weak);

        let mut group = vec![NONE; n];
        let mut groups = Vec::with_capacity(n);
        for i in 0..n {
            if group[i] != NONE {
                continue;
            }
            group[i] = groups.len();
            match partner[i] {
                NONE => groups.push([i, NONE]),
                j => {
                    group[j] = groups.len();
                    groups.push(if weak[i] { [j, i] } else { [i, j] });
                }
            }
        }
        let ng = groups.len();

        // Quotient graph of A + Aᵀ.
        let at = a.transpose();
        let (tptr, tidx) = (at.row_offsets(), at.col_indices());
        let mut g_ptr = Vec::with_capacity(ng + 1);
        let mut g_idx = Vec::with_capacity(2 * a.nnz());
        let mut mark = vec![NONE; ng];
        g_ptr.push(0);
        for (g, members) in groups.iter().enumerate() {
            mark[g] = g;
            for &m in members.iter().filter(|&&m| m != NONE) {
                let neighbours = idx[ptr[m]..ptr[m + 1]]
                    .iter()
                    .chain(&tidx[tptr[m]..tptr[m + 1]]);
                for &j in neighbours {
                    let h = group[j];
                    if mark[h] != g {
                        mark[h] = g;
                        g_idx.push(h);
                    }
                }
            }
            let start = g_ptr[g];
            g_idx[start..].sort_unstable();
            g_ptr.push(g_idx.len());
        }

        let mut perm = vec![0usize; ng];
        let mut perm_inv = vec![0usize; ng];
        if ng > 0 {
            let sym = SymbolicSparseColMatRef::new_checked(ng, ng, &g_ptr, None, &g_idx);
            let mut buf = MemBuffer::new(amd::order_scratch::<usize>(ng, g_idx.len()));
            amd::order(
                &mut perm,
                &mut perm_inv,
                sym,
                amd::Control::default(),
                MemStack::new(&mut buf),
            )
            .map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
        }
        let mut ordering = Self {
            partner,
            groups,
            adj_ptr: g_ptr,
            adj_idx: g_idx,
        };
        ordering.permute(&perm, &perm_inv);
        Ok(ordering)
    }

    /// Reorders the groups: new group `k` is old group `perm[k]`.
    pub fn permute(&mut self, perm: &[usize], perm_inv: &[usize]) {
        let groups = perm.iter().map(|&g| self.groups[g]).collect();
        let mut ptr = Vec::with_capacity(perm.len() + 1);
        let mut idx = Vec::with_capacity(self.adj_idx.len());
        ptr.push(0);
        for &g in perm {
            let start = idx.len();
            idx.extend(
                self.adj_idx[self.adj_ptr[g]..self.adj_ptr[g + 1]]
                    .iter()
                    .map(|&h| perm_inv[h])
                    .filter(|&h| h != perm_inv[g]),
            );
            idx[start..].sort_unstable();
            ptr.push(idx.len());
        }
        self.groups = groups;
        self.adj_ptr = ptr;
        self.adj_idx = idx;
    }

    /// Elimination order of the original indices.
    pub fn scalar_order(&self) -> Vec<usize> {
        self.groups
            .iter()
            .flatten()
            .copied()
            .filter(|&m| m != NONE)
            .collect()
    }
}

/// Pairs every unpaired row accepted by `root` with a `candidate`
/// neighbour: greedily by magnitude, then with augmenting paths so the result
/// is a maximum matching between the two sets.
///
/// Candidates may already be paired; the search then re-pairs their partner.
fn match_rows(
    ptr: &[usize],
    idx: &[usize],
    val: &[f64],
    partner: &mut [usize],
    root: impl Fn(usize) -> bool,
    candidate: impl Fn(usize, &[usize]) -> bool,
) {
    let n = partner.len();
    for i in 0..n {
        if !root(i) || partner[i] != NONE {
            continue;
        }
        let mut best = NONE;
        let mut bmax = 0.0;
        for p in ptr[i]..ptr[i + 1] {
            let j = idx[p];
            if j != i && partner[j] == NONE && candidate(j, partner) && val[p].abs() > bmax {
                bmax = val[p].abs();
                best = j;
            }
        }
        if best != NONE {
            partner[i] = best;
            partner[best] = i;
        }
    }

    let mut visited = vec![NONE; n];
    // (row searching for a partner, next entry to try)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    for start in 0..n {
        if !root(start) || partner[start] != NONE {
            continue;
        }
        stack.clear();
        path.clear();
        stack.push((start, ptr[start]));
        visited[start] = start;
        let mut found = false;
        while let Some(&mut (w, ref mut pos)) = stack.last_mut() {
            let mut next = None;
            while *pos < ptr[w + 1] {
                let p = *pos;
                *pos += 1;
                let j = idx[p];
                if j == w || val[p] == 0.0 || visited[j] == start || !candidate(j, partner) {
                    continue;
                }
                visited[j] = start;
                next = Some(j);
                break;
            }
            match next {
                Some(j) if partner[j] == NONE => {
                    path.push(j);
                    found = true;
                    break;
                }
                Some(j) if visited[partner[j]] != start => {
                    path.push(j);
                    visited[partner[j]] = start;
                    stack.push((partner[j], ptr[partner[j]]));
                }
                Some(_) => {}
                None => {
                    stack.pop();
                    path.pop();
                }
            }
        }
        if found {
            // path[k] is the candidate reached from stack[k]'s row.
            for (k, &(w, _)) in stack.iter().enumerate() {
                partner[w] = path[k];
                partner[path[k]] = w;
            }
        }
    }
}
