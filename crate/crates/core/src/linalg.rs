//! Dense and row-compressed matrices plus a column-pivoted Householder QR.

use serde::{Deserialize, Serialize};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a.iter().enumerate() {
                if aik != 0.0 {
                    for (oj, &bkj) in o.iter_mut().zip(other.row(k)) {
                        *oj += aik * bkj;
                    }
                }
            }
        }
        out
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists. Columns within a row must be
    /// strictly increasing and below `cols`.
    pub fn from_row_entries(cols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in rows {
            let mut last = None;
            for &(j, v) in r {
                assert!(j < cols, "column {j} out of range");
                assert!(last.is_none_or(|l| j > l), "columns must increase");
                last = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self::from_row_entries(m.cols(), &rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }
}

/// A borrowed row of either storage layout.
#[derive(Clone, Copy, Debug)]
pub enum RowView<'a> {
    Dense(&'a [f64]),
    Sparse {
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl RowView<'_> {
    #[inline]
    pub fn dot(&self, v: &[f64]) -> f64 {
        match *self {
            RowView::Dense(r) => r.iter().zip(v).map(|(a, b)| a * b).sum(),
            RowView::Sparse { indices, values } => indices
                .iter()
                .zip(values)
                .map(|(&j, &x)| x * v[j])
                .sum(),
        }
    }

    /// `out += alpha * row`.
    #[inline]
    pub fn axpy_into(&self, alpha: f64, out: &mut [f64]) {
        match *self {
            RowView::Dense(r) => {
                for (o, &x) in out.iter_mut().zip(r) {
                    *o += alpha * x;
                }
            }
            RowView::Sparse { indices, values } => {
                for (&j, &x) in indices.iter().zip(values) {
                    out[j] += alpha * x;
                }
            }
        }
    }

    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match *self {
            RowView::Dense(r) => r
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .for_each(|(j, &x)| f(j, x)),
            RowView::Sparse { indices, values } => indices
                .iter()
                .zip(values)
                .filter(|(_, x)| **x != 0.0)
                .for_each(|(&j, &x)| f(j, x)),
        }
    }

    pub fn to_dense(&self, cols: usize) -> Vec<f64> {
        match *self {
            RowView::Dense(r) => r.to_vec(),
            RowView::Sparse { .. } => {
                let mut out = vec![0.0; cols];
                self.axpy_into(1.0, &mut out);
                out
            }
        }
    }

    pub fn norm2_sq(&self) -> f64 {
        let vals = match *self {
            RowView::Dense(r) => r,
            RowView::Sparse { values, .. } => values,
        };
        vals.iter().map(|x| x * x).sum()
    }
}

/// Matrix in either storage layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> RowView<'_> {
        match self {
            Matrix::Dense(m) => RowView::Dense(m.row(i)),
            Matrix::Sparse(m) => {
                let (indices, values) = m.row(i);
                RowView::Sparse { indices, values }
            }
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    /// Number of nonzero entries (explicit zeros in sparse storage are not counted).
    pub fn nnz(&self) -> usize {
        let vals = match self {
            Matrix::Dense(m) => m.as_slice(),
            Matrix::Sparse(m) => &m.values,
        };
        vals.iter().filter(|v| **v != 0.0).count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => {
                let mut out = DenseMatrix::zeros(m.rows(), m.cols());
                for i in 0..m.rows() {
                    self.row(i).axpy_into(1.0, out.row_mut(i));
                }
                out
            }
        }
    }

    /// Dense copy with row `i` scaled by `scale[i]`.
    pub fn scaled_rows_dense(&self, scale: &[f64]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows(), self.cols());
        for (i, &s) in scale.iter().enumerate() {
            self.row(i).axpy_into(s, out.row_mut(i));
        }
        out
    }

    /// Keep the rows listed in `idx` (repetition allowed), as a dense matrix.
    pub fn select_rows_dense(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(idx.len(), self.cols());
        for (r, &i) in idx.iter().enumerate() {
            self.row(i).axpy_into(1.0, out.row_mut(r));
        }
        out
    }

    /// Keep the rows listed in `idx`, preserving the storage layout.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        match self {
            Matrix::Dense(_) => Matrix::Dense(self.select_rows_dense(idx)),
            Matrix::Sparse(m) => {
                let rows: Vec<Vec<(usize, f64)>> = idx
                    .iter()
                    .map(|&i| {
                        let (ix, vs) = m.row(i);
                        ix.iter().copied().zip(vs.iter().copied()).collect()
                    })
                    .collect();
                Matrix::Sparse(CsrMatrix::from_row_entries(m.cols(), &rows))
            }
        }
    }
}

/// Householder QR with column pivoting, `A P = Q R`.
///
/// The factorization keeps the Householder vectors so that the thin `Q` can
/// be formed for the numerically determined rank only.
#[derive(Clone, Debug)]
pub struct ColPivQr {
    rows: usize,
    cols: usize,
    /// Column-major working storage: R above the diagonal, reflector tails below.
    a: Vec<f64>,
    /// Reflector heads (`v[0]`) and scalings `2 / v'v`.
    heads: Vec<f64>,
    betas: Vec<f64>,
    diag: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl ColPivQr {
    /// Relative tolerance on `|R_kk| / |R_00|` below which columns count as dependent.
    pub fn default_tolerance(rows: usize, cols: usize) -> f64 {
        f64::EPSILON * rows.max(cols) as f64 * 16.0
    }

    pub fn new(m: &DenseMatrix) -> Self {
        Self::with_tolerance(m, Self::default_tolerance(m.rows(), m.cols()))
    }

    pub fn with_tolerance(m: &DenseMatrix, tol: f64) -> Self {
        let (n, d) = (m.rows(), m.cols());
        let mut a = vec![0.0; n * d];
        for i in 0..n {
            for (j, &v) in m.row(i).iter().enumerate() {
                a[j * n + i] = v;
            }
        }
        let steps = n.min(d);
        let mut perm: Vec<usize> = (0..d).collect();
        let mut heads = Vec::with_capacity(steps);
        let mut betas = Vec::with_capacity(steps);
        let mut diag = Vec::with_capacity(steps);
        let mut rank = 0;
        let mut r00 = 0.0_f64;

        for k in 0..steps {
            // Pivot on the largest remaining column norm. Norms are recomputed
            // rather than downdated; d is small so this stays O(n d^2).
            let (p, best) = (k..d)
                .map(|j| (j, a[j * n + k..(j + 1) * n].iter().map(|x| x * x).sum::<f64>()))
                .fold((k, -1.0), |acc, (j, s)| if s > acc.1 { (j, s) } else { acc });
            if p != k {
                for i in 0..n {
                    a.swap(k * n + i, p * n + i);
                }
                perm.swap(k, p);
            }
            let norm = best.sqrt();
            if k == 0 {
                r00 = norm;
            }
            if norm == 0.0 || norm <= tol * r00 {
                break;
            }
            let col = &mut a[k * n + k..(k + 1) * n];
            let x0 = col[0];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let head = x0 - alpha;
            let vtv = head * head + (norm * norm - x0 * x0).max(0.0);
            let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            col[0] = alpha;
            heads.push(head);
            betas.push(beta);
            diag.push(alpha);
            rank += 1;

            let (left, right) = a.split_at_mut((k + 1) * n);
            let tail = &left[k * n + k + 1..(k + 1) * n];
            for j in 0..d - k - 1 {
                let c = &mut right[j * n + k..(j + 1) * n];
                let s = head * c[0] + tail.iter().zip(&c[1..]).map(|(v, x)| v * x).sum::<f64>();
                let f = beta * s;
                if f != 0.0 {
                    c[0] -= f * head;
                    for (x, v) in c[1..].iter_mut().zip(tail) {
                        *x -= f * v;
                    }
                }
            }
        }

        Self {
            rows: n,
            cols: d,
            a,
            heads,
            betas,
            diag,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Column permutation: column `k` of `A P` is column `perm()[k]` of `A`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Leading `rank x rank` block of R, row-major.
    pub fn r_leading(&self) -> DenseMatrix {
        let r = self.rank;
        let n = self.rows;
        let mut out = DenseMatrix::zeros(r, r);
        for i in 0..r {
            out.set(i, i, self.diag[i]);
            for j in i + 1..r {
                out.set(i, j, self.a[j * n + i]);
            }
        }
        out
    }

    /// Thin `Q` with `rank` orthonormal columns, row-major `rows x rank`.
    pub fn thin_q(&self) -> DenseMatrix {
        let (n, r) = (self.rows, self.rank);
        // Column-major accumulation of H_0 ... H_{r-1} [I; 0].
        let mut q = vec![0.0; n * r];
        for j in 0..r {
            q[j * n + j] = 1.0;
        }
        for k in (0..r).rev() {
            let head = self.heads[k];
            let beta = self.betas[k];
            let tail = &self.a[k * n + k + 1..(k + 1) * n];
            for j in k..r {
                let c = &mut q[j * n + k..(j + 1) * n];
                let s = head * c[0] + tail.iter().zip(&c[1..]).map(|(v, x)| v * x).sum::<f64>();
                let f = beta * s;
                if f != 0.0 {
                    c[0] -= f * head;
                    for (x, v) in c[1..].iter_mut().zip(tail) {
                        *x -= f * v;
                    }
                }
            }
        }
        let mut out = DenseMatrix::zeros(n, r);
        for j in 0..r {
            for i in 0..n {
                out.set(i, j, q[j * n + i]);
            }
        }
        out
    }

    /// Euclidean norms of the rows of the thin `Q`.
    pub fn q_row_norms(&self) -> Vec<f64> {
        let q = self.thin_q();
        (0..q.rows())
            .map(|i| q.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Solve `R y = b` in place for upper-triangular row-major `R`.
pub fn solve_upper_in_place(r: &DenseMatrix, b: &mut [f64]) {
    let n = r.rows();
    for i in (0..n).rev() {
        let row = r.row(i);
        let s: f64 = (i + 1..n).map(|j| row[j] * b[j]).sum();
        b[i] = (b[i] - s) / row[i];
    }
}
