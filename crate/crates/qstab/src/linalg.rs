//! Dense symmetric-matrix kernels: eigendecomposition (cyclic Jacobi),
//! Cholesky factorization, norms and tolerance-based definiteness tests.
//!
//! Everything here operates on small matrices (dimensions of a few tens at
//! most), so all storage is dense and all algorithms favor robustness over
//! asymptotic speed. All functions are pure; shared read-only use from
//! multiple threads is safe.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    InvalidMatrix,
    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPd { row: usize, pivot: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a flat row-major slice.
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Mat { rows, cols, data: data.to_vec() }
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        assert!(!cols.is_empty());
        let rows = cols[0].len();
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged column");
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= c;
        }
        m
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&rhs.data) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&rhs.data) {
            *v -= w;
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense symmetric matrix. Exact symmetry `a[(i,j)] == a[(j,i)]` is enforced
/// at construction by averaging mirrored entries, so downstream code may rely
/// on it bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>, // row-major, full storage
}

impl SymMatrix {
    /// Symmetrize a full row-major matrix: entries become `(a_ij + a_ji)/2`.
    pub fn from_rows(dim: usize, data: &[f64]) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        assert_eq!(data.len(), dim * dim, "row-major data length mismatch");
        let mut out = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                out[i * dim + j] = v;
                out[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data: out }
    }

    pub fn from_mat(m: &Mat) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetric matrix must be square");
        SymMatrix::from_rows(m.rows(), m.data())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = SymMatrix::zeros(dim);
        for i in 0..dim {
            s.data[i * dim + i] = 1.0;
        }
        s
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut s = SymMatrix::zeros(dim);
        for i in 0..dim {
            s.data[i * dim + i] = c;
        }
        s
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut s = SymMatrix::zeros(entries.len());
        for (i, v) in entries.iter().enumerate() {
            s.data[i * entries.len() + i] = *v;
        }
        s
    }

    /// Outer product `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut s = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                s.data[i * n + j] = v[i] * v[j];
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set entry `(i,j)` and its mirror `(j,i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn add_assign_outer(&mut self, v: &[f64], weight: f64) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let wi = weight * v[i];
            for j in 0..self.dim {
                self.data[i * self.dim + j] += wi * v[j];
            }
        }
    }

    pub fn add(&self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&rhs.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&rhs.data) {
            *v -= w;
        }
        out
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn add_scaled_identity(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += c;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_rows(self.dim, self.dim, &self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.get(i, j) * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    /// Principal submatrix picking `rows` (same set for columns).
    pub fn submatrix(&self, rows: &[usize]) -> SymMatrix {
        let k = rows.len();
        let mut out = SymMatrix::zeros(k);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in rows.iter().enumerate() {
                out.data[a * k + b] = self.get(i, j);
            }
        }
        out
    }

    /// Rectangular block `rows × cols` as a general matrix.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        let mut out = Mat::zeros(rows.len(), cols.len());
        for (a, i) in rows.clone().enumerate() {
            for (b, j) in cols.clone().enumerate() {
                out[(a, b)] = self.get(i, j);
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix: `A = V diag(λ) Vᵀ` with
/// eigenvalues sorted ascending and `V` orthogonal (eigenvectors in columns).
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl EigDecomposition {
    /// `V diag(λ) Vᵀ`, for reconstruction checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            let lam = self.eigenvalues[k];
            for i in 0..n {
                let vik = v[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)];
                }
            }
        }
        SymMatrix::from_mat(&out)
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &SymMatrix) -> Result<EigDecomposition, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::InvalidMatrix);
    }
    let n = a.dim();
    let mut m = a.data.clone();
    let mut v = Mat::identity(n);

    let norm: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-30_f64.max(norm * 1e-15);

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off(&m) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= stop / (n as f64) {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // stable rotation computation
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[i * n + p];
                        let aiq = m[i * n + q];
                        let new_p = c * aip - s * aiq;
                        let new_q = s * aip + c * aiq;
                        m[i * n + p] = new_p;
                        m[p * n + i] = new_p;
                        m[i * n + q] = new_q;
                        m[q * n + i] = new_q;
                    }
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok(EigDecomposition { eigenvalues, eigenvectors: vectors })
}

/// Smallest eigenvalue.
pub fn min_eig(a: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(sym_eig(a)?.eigenvalues[0])
}

/// Largest eigenvalue.
pub fn max_eig(a: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(*sym_eig(a)?.eigenvalues.last().unwrap())
}

/// Induced Euclidean norm, i.e. the largest eigenvalue magnitude.
pub fn spectral_norm(a: &SymMatrix) -> Result<f64, LinalgError> {
    let eig = sym_eig(a)?;
    let lo = eig.eigenvalues[0].abs();
    let hi = eig.eigenvalues.last().unwrap().abs();
    Ok(lo.max(hi))
}

/// Positive semidefiniteness with a relative tolerance:
/// `min_eig(a) >= -tol * (1 + ‖a‖₂)`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> Result<bool, LinalgError> {
    assert!(tol >= 0.0, "tolerance must be nonnegative");
    let eig = sym_eig(a)?;
    let lo = eig.eigenvalues[0];
    let hi = *eig.eigenvalues.last().unwrap();
    let norm = lo.abs().max(hi.abs());
    Ok(lo >= -tol * (1.0 + norm))
}

/// Cholesky factorization `a = L Lᵀ` with `L` lower triangular.
/// Fails with `NotPd` on the first nonpositive pivot.
pub fn cholesky(a: &SymMatrix) -> Result<Mat, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::InvalidMatrix);
    }
    let n = a.dim();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return Err(LinalgError::NotPd { row: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let n = a.dim();
    let l = cholesky(a)?;
    let mut inv = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = cholesky_solve(&l, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(SymMatrix::from_mat(&inv))
}

/// Symmetric pseudo-inverse via eigendecomposition; eigenvalues with
/// magnitude below `cutoff * max|λ|` are treated as zero.
pub fn sym_pinv(a: &SymMatrix, cutoff: f64) -> Result<SymMatrix, LinalgError> {
    let eig = sym_eig(a)?;
    let n = a.dim();
    let lam_max = eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = cutoff * lam_max.max(1e-300);
    let v = &eig.eigenvectors;
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam.abs() <= threshold {
            continue;
        }
        let w = 1.0 / lam;
        for i in 0..n {
            let vik = v[(i, k)] * w;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)];
            }
        }
    }
    Ok(SymMatrix::from_mat(&out))
}
