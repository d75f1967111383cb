//! Minimal dense real linear algebra: column extraction, singular values,
//! Gram solves, least squares, range projection, coherence.
//!
//! Everything is backed by a one-sided Jacobi SVD, which is accurate to
//! near machine precision for the desk-scale matrices this crate targets
//! (n up to a few hundred). Matrices are dense, row-major, immutable.

use crate::error::{Error, Result};

/// A singular value sigma is treated as zero when sigma <= RANK_TOL * sigma_max.
pub const RANK_TOL: f64 = 1e-10;

/// Relative deviation from unit column norm tolerated by [`coherence`].
pub const COL_NORM_TOL: f64 = 1e-8;

/// Dense real matrix, row-major storage.
///
/// Invariants: `entries.len() == rows * cols` and all entries finite.
/// A zero column count is permitted so that [`columns`] can return an
/// `m x 0` selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !e.is_finite()) {
            return Err(Error::Input(format!("non-finite matrix entry {bad}")));
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Input("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    /// Column-major construction, handy for building `A_K` from columns.
    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("column length mismatch".into()));
        }
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.entries[i * m.cols + j] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// `A x`. Panics on dimension mismatch (internal hot path). An `m x 0`
    /// matrix maps the empty vector to zeros.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        if self.cols == 0 {
            return vec![0.0; self.rows];
        }
        self.entries.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    /// `A^T y`.
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "matvec_t dimension mismatch");
        let mut out = vec![0.0; self.cols];
        if self.cols == 0 {
            return out;
        }
        for (row, yi) in self.entries.chunks_exact(self.cols).zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    /// Inner product of column `j` with a length-`rows` vector.
    pub fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        (0..self.rows).map(|i| self.get(i, j) * y[i]).sum()
    }
}

/// Sorted, duplicate-free set of column indices.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Requires strictly increasing indices.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("index set must be strictly increasing".into()));
        }
        Ok(IndexSet { indices })
    }

    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet { indices }
    }

    pub fn empty() -> Self {
        IndexSet { indices: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Indices in `[0, n)` not contained in `self`.
    pub fn complement(&self, n: usize) -> IndexSet {
        IndexSet { indices: (0..n).filter(|i| !self.contains(*i)).collect() }
    }

    /// True when `self` is a subset of `other`.
    pub fn subset_of(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }
}

/// The `m x |S|` matrix whose j-th column is column `S[j]` of `M`.
pub fn columns(m: &Matrix, s: &IndexSet) -> Result<Matrix> {
    if let Some(bad) = s.iter().find(|&i| i >= m.cols()) {
        return Err(Error::Input(format!(
            "column index {bad} out of range for {} columns",
            m.cols()
        )));
    }
    let mut out = Matrix::zeros(m.rows(), s.len());
    for (jj, j) in s.iter().enumerate() {
        for i in 0..m.rows() {
            out.entries[i * out.cols + jj] = m.get(i, j);
        }
    }
    Ok(out)
}

/// Thin SVD `A = U diag(sigma) V^T` with `k = min(rows, cols)` columns in
/// `U` and `V` and `sigma` sorted descending. Columns of `U` belonging to
/// zero singular values are zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// Number of singular values above `RANK_TOL * sigma_max`.
    pub fn rank(&self) -> usize {
        match self.sigma.first() {
            None | Some(0.0) => 0,
            Some(&smax) => self.sigma.iter().filter(|&&s| s > RANK_TOL * smax).count(),
        }
    }
}

/// One-sided Jacobi SVD of a matrix with `rows >= cols`.
/// Returns (columns of U scaled back to unit norm, sigma, V) unsorted.
fn jacobi_tall(a: &Matrix) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let n = a.cols();
    let mut b: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let eps = 1e-15;
    let max_sweeps = 120;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (app, aqq, apq) = {
                    let (cp, cq) = (&b[p], &b[q]);
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut b, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = b.iter().map(|c| nrm2(c)).collect();
    let u: Vec<Vec<f64>> = b
        .into_iter()
        .zip(&sigma)
        .map(|(c, &s)| {
            if s > 0.0 {
                c.into_iter().map(|x| x / s).collect()
            } else {
                vec![0.0; a.rows()]
            }
        })
        .collect();
    (u, sigma, v)
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let new_p = c * *xp - s * *xq;
        let new_q = s * *xp + c * *xq;
        *xp = new_p;
        *xq = new_q;
    }
}

/// Thin SVD via one-sided Jacobi, valid for any shape.
pub fn svd(a: &Matrix) -> Svd {
    if a.cols() == 0 || a.rows() == 0 {
        return Svd {
            u: Matrix::zeros(a.rows(), 0),
            sigma: Vec::new(),
            v: Matrix::zeros(a.cols(), 0),
        };
    }
    let transposed = a.rows() < a.cols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (u_cols, sigma, v_cols) = jacobi_tall(&work);

    // sort descending by sigma
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let sigma_sorted: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
    let u_sorted: Vec<Vec<f64>> = order.iter().map(|&i| u_cols[i].clone()).collect();
    let v_sorted: Vec<Vec<f64>> = order.iter().map(|&i| v_cols[i].clone()).collect();

    let (u_final, v_final) = if transposed { (v_sorted, u_sorted) } else { (u_sorted, v_sorted) };
    Svd {
        u: Matrix::from_cols(a.rows(), &u_final).expect("svd shape"),
        sigma: sigma_sorted,
        v: Matrix::from_cols(a.cols(), &v_final).expect("svd shape"),
    }
}

/// All singular values, descending, including numerically zero ones.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.cols() == 0 || a.rows() == 0 {
        return Vec::new();
    }
    let transposed = a.rows() < a.cols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (_, mut sigma, _) = jacobi_tall(&work);
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

/// Number of singular values above `RANK_TOL * sigma_max`. Zero matrix has rank 0.
pub fn numerical_rank(a: &Matrix) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        None | Some(&0.0) => 0,
        Some(&smax) => sv.iter().filter(|&&s| s > RANK_TOL * smax).count(),
    }
}

/// Smallest positive and largest singular value. Singular values at or
/// below `RANK_TOL * sigma_max` are excluded from the minimum.
pub fn svd_extremes(a: &Matrix) -> Result<(f64, f64)> {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::Degenerate("zero matrix has no positive singular value".into()));
    }
    let smin_pos = sv
        .iter()
        .copied()
        .filter(|&s| s > RANK_TOL * smax)
        .fold(f64::INFINITY, f64::min);
    Ok((smin_pos, smax))
}

/// Solves `(A_K^T A_K) w = v` through the SVD of `A_K` itself, never
/// forming the Gram matrix. Errors if `A_K` is numerically rank-deficient.
pub fn gram_solve(a_k: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    let k = a_k.cols();
    if v.len() != k {
        return Err(Error::Dimension(format!(
            "gram_solve rhs length {} != {} columns",
            v.len(),
            k
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let dec = svd(a_k);
    let rank = dec.rank();
    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }
    // w = V diag(1/sigma^2) V^T v
    let mut w = vec![0.0; k];
    for j in 0..k {
        let vj = dec.v.col(j);
        let coeff = dot(&vj, v) / (dec.sigma[j] * dec.sigma[j]);
        for (wi, vji) in w.iter_mut().zip(&vj) {
            *wi += coeff * vji;
        }
    }
    Ok(w)
}

/// Minimum-norm least-squares solution of `min ||Ax - b||`.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "least_squares rhs length {} != {} rows",
            b.len(),
            a.rows()
        )));
    }
    let dec = svd(a);
    let rank = dec.rank();
    let mut x = vec![0.0; a.cols()];
    for j in 0..rank {
        let uj = dec.u.col(j);
        let coeff = dot(&uj, b) / dec.sigma[j];
        let vj = dec.v.col(j);
        for (xi, vji) in x.iter_mut().zip(&vj) {
            *xi += coeff * vji;
        }
    }
    Ok(x)
}

/// Euclidean projection of `b` onto `range(A)`.
pub fn project_range(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "project_range rhs length {} != {} rows",
            b.len(),
            a.rows()
        )));
    }
    let dec = svd(a);
    let rank = dec.rank();
    let mut p = vec![0.0; a.rows()];
    for j in 0..rank {
        let uj = dec.u.col(j);
        let coeff = dot(&uj, b);
        for (pi, uji) in p.iter_mut().zip(&uj) {
            *pi += coeff * uji;
        }
    }
    Ok(p)
}

/// Orthonormal basis of the orthogonal complement of `range(A)` in R^m,
/// built by projecting out the range from canonical vectors.
pub fn nullspace_of_transpose(a: &Matrix) -> Vec<Vec<f64>> {
    let m = a.rows();
    let dec = svd(a);
    let rank = dec.rank();
    let range_basis: Vec<Vec<f64>> = (0..rank).map(|j| dec.u.col(j)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - rank);
    for e in 0..m {
        if basis.len() == m - rank {
            break;
        }
        let mut w = vec![0.0; m];
        w[e] = 1.0;
        // project out range(A) and previously accepted directions, twice for
        // numerical orthogonality
        for _ in 0..2 {
            for u in range_basis.iter().chain(basis.iter()) {
                let c = dot(u, &w);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let nw = nrm2(&w);
        if nw > 1e-8 {
            for wi in w.iter_mut() {
                *wi /= nw;
            }
            basis.push(w);
        }
    }
    basis
}

/// Maximum absolute inner product between distinct columns. Requires unit
/// columns within `COL_NORM_TOL`; a single column has coherence 0.
pub fn coherence(a: &Matrix) -> Result<f64> {
    for j in 0..a.cols() {
        let nj = nrm2(&a.col(j));
        if (nj - 1.0).abs() > COL_NORM_TOL {
            return Err(Error::Input(format!(
                "coherence requires unit columns: column {j} has norm {nj}"
            )));
        }
    }
    if a.cols() <= 1 {
        return Ok(0.0);
    }
    let mut mu: f64 = 0.0;
    for i in 0..a.cols() - 1 {
        let ci = a.col(i);
        for j in i + 1..a.cols() {
            mu = mu.max(a.col_dot(j, &ci).abs());
        }
    }
    Ok(mu)
}

// ---- small vector helpers ----

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn nrm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[inline]
pub fn nrm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn nrm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// x - y
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}
