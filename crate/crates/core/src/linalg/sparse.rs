use std::io::{self, Write};

use super::LinalgError;

/// Compressed-row sparse matrix.
///
/// Column indices are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Duplicates are summed in a canonical order (sorted by value), so the
    /// result is bitwise independent of the order of `triplets`.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(LinalgError::IndexOutOfRange {
                    row: i,
                    col: j,
                    n_rows,
                    n_cols,
                });
            }
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
        let mut sorted = triplets.to_vec();
        sorted.sort_unstable_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then_with(|| a.2.total_cmp(&b.2))
        });

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_offsets[i + 1] += 1;
                col_indices.push(j);
                values.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds directly from compressed-row arrays, validating the invariants.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_offsets.len() != n_rows + 1
            || row_offsets[0] != 0
            || *row_offsets.last().unwrap() != col_indices.len()
            || col_indices.len() != values.len()
        {
            return Err(LinalgError::MalformedCsr);
        }
        for i in 0..n_rows {
            let (s, e) = (row_offsets[i], row_offsets[i + 1]);
            if s > e {
                return Err(LinalgError::MalformedCsr);
            }
            let row = &col_indices[s..e];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&j| j >= n_cols) {
                return Err(LinalgError::MalformedCsr);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    /// Position of `(i, j)` in the value array, if it is part of the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        self.col_indices[s..e].binary_search(&j).ok().map(|k| s + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to an entry that must already be in the pattern.
    ///
    /// # Panics
    ///
    /// Panics if `(i, j)` is not a structural entry.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `A ← diag(d) A diag(d)`.
    pub fn scale_symmetric(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n_rows, "scaling length");
        for i in 0..self.n_rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                self.values[p] *= d[i] * d[self.col_indices[p]];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.matvec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                col_indices[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Largest absolute entry of `self - other`, over the union of both patterns.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut m: f64 = 0.0;
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut a, mut b) = (0, 0);
            while a < ca.len() || b < cb.len() {
                let d = match (ca.get(a), cb.get(b)) {
                    (Some(&ja), Some(&jb)) if ja == jb => {
                        a += 1;
                        b += 1;
                        va[a - 1] - vb[b - 1]
                    }
                    (Some(&ja), Some(&jb)) if ja < jb => {
                        a += 1;
                        va[a - 1]
                    }
                    (Some(_), None) => {
                        a += 1;
                        va[a - 1]
                    }
                    _ => {
                        b += 1;
                        -vb[b - 1]
                    }
                };
                m = m.max(d.abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Replaces rows and columns of `dofs` by the identity.
    ///
    /// Used for essential conditions on increments, whose prescribed value is
    /// zero. The pattern must contain the diagonal of every constrained row.
    pub fn eliminate_symmetric(&mut self, constrained: &[bool]) {
        assert_eq!(constrained.len(), self.n_rows);
        for i in 0..self.n_rows {
            assert!(
                !constrained[i] || self.position(i, i).is_some(),
                "constrained row {i} has no diagonal entry"
            );
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            for k in s..e {
                let j = self.col_indices[k];
                if constrained[i] || (j < constrained.len() && constrained[j]) {
                    self.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }

    /// Dense copy, for tests and small debugging dumps.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    /// Coordinate text dump, one `i j value` line per stored entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(w, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Sparsity pattern accumulated from element connectivity.
///
/// Produces a zero-valued [`SparseMatrix`] into which element matrices are
/// scattered with [`SparseMatrix::add_to`].
#[derive(Debug, Clone)]
pub struct PatternBuilder {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl PatternBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![Vec::new(); n_rows],
        }
    }

    /// Couples every dof in `rows` with every dof in `cols`.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize]) {
        for &i in rows {
            debug_assert!(i < self.n_rows);
            self.rows[i].extend(
                cols.iter()
                    .copied()
                    .inspect(|&j| debug_assert!(j < self.n_cols)),
            );
        }
    }

    pub fn add_entry(&mut self, i: usize, j: usize) {
        self.rows[i].push(j);
    }

    pub fn build(self) -> SparseMatrix {
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for mut r in self.rows {
            r.sort_unstable();
            r.dedup();
            col_indices.extend_from_slice(&r);
            row_offsets.push(col_indices.len());
        }
        let nnz = col_indices.len();
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values: vec![0.0; nnz],
        }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
    }

    #[test]
    fn empty_triplets_give_empty_pattern() {
        let a = SparseMatrix::from_triplets(3, 4, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.matvec(&[1.0; 4]), vec![0.0; 3]);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let err = SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, LinalgError::IndexOutOfRange { row: 2, .. }));
    }

    #[test]
    fn transpose_roundtrip() {
        let a =
            SparseMatrix::from_triplets(2, 3, &[(0, 2, 1.5), (1, 0, -2.0), (1, 2, 4.0)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(2, 0), 1.5);
        assert_eq!(t.get(0, 1), -2.0);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn symmetric_elimination_keeps_identity_rows() {
        let mut a = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        )
        .unwrap();
        a.eliminate_symmetric(&[true, false]);
        assert_eq!(a.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn coordinate_dump_lists_entries() {
        let a = SparseMatrix::from_triplets(2, 2, &[(1, 0, 0.5)]).unwrap();
        let mut out = Vec::new();
        a.write_coordinate(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("1 0 5.0"));
        assert_eq!(s.lines().count(), 1);
    }
}
