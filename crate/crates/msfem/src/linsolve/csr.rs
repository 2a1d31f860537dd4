use num_complex::Complex64;

/// Compressed sparse row matrix with complex entries.
///
/// Column indices are sorted and unique within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays. Panics if the arrays are inconsistent.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<Complex64>,
    ) -> Self {
        assert_eq!(row_ptr.len(), nrows + 1);
        assert_eq!(col_idx.len(), values.len());
        assert_eq!(*row_ptr.last().unwrap(), col_idx.len());
        for r in 0..nrows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            assert!(cols.windows(2).all(|w| w[0] < w[1]), "row {r} not sorted/unique");
            assert!(cols.iter().all(|&c| c < ncols));
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    /// `diag(dr) * self * diag(dc)`.
    pub fn scaled(&self, dr: &[f64], dc: &[f64]) -> CsrMatrix {
        assert_eq!(dr.len(), self.nrows);
        assert_eq!(dc.len(), self.ncols);
        let mut values = self.values.clone();
        for r in 0..self.nrows {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                values[p] *= dr[r] * dc[self.col_idx[p]];
            }
        }
        CsrMatrix { values, ..self.clone() }
    }

    /// Sum duplicate triplets. Duplicates are added in the order in which
    /// they appear, so a deterministic triplet list gives bitwise
    /// reproducible values.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        // stable counting sort by row
        let mut count = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            count[r + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut order = vec![0usize; triplets.len()];
        for (t, &(r, _, _)) in triplets.iter().enumerate() {
            order[next[r]] = t;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..nrows {
            let seg = &mut order[count[r]..count[r + 1]];
            seg.sort_by_key(|&t| triplets[t].1); // stable
            let mut last = usize::MAX;
            for &t in seg.iter() {
                let (_, c, v) = triplets[t];
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != Complex64::new(0.0, 0.0) {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Iterate over `(column, value)` of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            count[c + 1] += 1;
        }
        for i in 0..self.ncols {
            count[i + 1] += count[i];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![Complex64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                let k = next[c];
                col_idx[k] = r;
                values[k] = v;
                next[c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// Exact (bitwise) complex symmetry `A == A^T`, no conjugation.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && *self == self.transpose()
    }

    /// Largest `|A_ij - A_ji|` relative to the largest `|A_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let mut amax = 0.0f64;
        let mut dmax = 0.0f64;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                amax = amax.max(v.norm());
                dmax = dmax.max((v - t.get(r, c)).norm());
            }
        }
        if amax > 0.0 {
            dmax / amax
        } else {
            0.0
        }
    }

    /// Principal submatrix on `keep` (indices in increasing order) and the
    /// coupling block `A[keep, drop]` in the form `(row in keep, original column, value)`.
    pub(crate) fn split(&self, keep_index: &[Option<usize>]) -> (CsrMatrix, Vec<(usize, usize, Complex64)>) {
        let nk = keep_index.iter().filter(|k| k.is_some()).count();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut coupling = Vec::new();
        for r in 0..self.nrows {
            let Some(rk) = keep_index[r] else { continue };
            for (c, v) in self.row(r) {
                match keep_index[c] {
                    Some(ck) => {
                        col_idx.push(ck);
                        values.push(v);
                    }
                    None => coupling.push((rk, c, v)),
                }
            }
            row_ptr.push(col_idx.len());
        }
        (CsrMatrix { nrows: nk, ncols: nk, row_ptr, col_idx, values }, coupling)
    }
}
