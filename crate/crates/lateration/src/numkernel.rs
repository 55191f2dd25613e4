//! Small dense real-matrix kernel: rank decisions, pseudoinverse, nullspace,
//! symmetric eigendecomposition and determinants, all with explicit tolerances.
//!
//! Everything here is built on the singular value decomposition. Rank
//! decisions use a *relative* cutoff `rank_rel` on singular values, so every
//! decision is invariant under uniform rescaling of the input. The
//! pseudoinverse is computed from the SVD rather than from the normal
//! equations to avoid squaring the condition number. Matrices in this crate
//! are tiny (at most ~100 rows and a few dozen columns), so there is no
//! sparse path.

use nalgebra::DMatrix;
use std::fmt;

// ── Tolerances ─────────────────────────────────────────────────────────────

/// Numerical tolerances shared across the crate.
///
/// `rank_rel` is the relative singular-value cutoff for rank decisions.
/// `class_abs` is the absolute threshold for classification decisions on
/// scale-normalized (dimensionless) quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rank_rel: f64,
    pub class_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rank_rel: 1e-9, class_abs: 1e-9 }
    }
}

impl Tolerance {
    /// Both cutoffs must lie strictly between 0 and 1.
    pub fn new(rank_rel: f64, class_abs: f64) -> Result<Self, KernelError> {
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if !ok(rank_rel) || !ok(class_abs) {
            return Err(KernelError::BadTolerance { rank_rel, class_abs });
        }
        Ok(Self { rank_rel, class_abs })
    }
}

// ── Error type ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    /// Entry count does not match `rows × cols`, or a dimension is zero.
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    /// A NaN or infinity appeared in the input.
    NonFinite,
    /// Tolerances must lie strictly between 0 and 1.
    BadTolerance { rank_rel: f64, class_abs: f64 },
    /// The matrix does not have full column rank at the given tolerance.
    ColumnRankDeficient { rank: usize, cols: usize },
    /// The matrix is not square-symmetric within tolerance.
    NotSymmetric,
    /// Determinants need a square matrix.
    NotSquare { rows: usize, cols: usize },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShapeMismatch { rows, cols, len } => {
                write!(f, "shape mismatch: {rows}x{cols} matrix with {len} entries")
            }
            Self::NonFinite => write!(f, "matrix entries must be finite"),
            Self::BadTolerance { rank_rel, class_abs } => {
                write!(f, "tolerances must be in (0,1): rank_rel={rank_rel}, class_abs={class_abs}")
            }
            Self::ColumnRankDeficient { rank, cols } => {
                write!(f, "column rank deficient: rank {rank} < {cols} columns")
            }
            Self::NotSymmetric => write!(f, "matrix is not symmetric within tolerance"),
            Self::NotSquare { rows, cols } => write!(f, "matrix is not square: {rows}x{cols}"),
        }
    }
}

impl std::error::Error for KernelError {}

// ── Matrix ──────────────────────────────────────────────────────────────────

/// Dense row-major matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    /// Build from row-major entries; rejects empty shapes, length mismatches
    /// and non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, KernelError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(KernelError::ShapeMismatch { rows, cols, len: entries.len() });
        }
        if !entries.iter().all(|e| e.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    /// Build from equally long row slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(KernelError::ShapeMismatch { rows: r, cols: c, len: 0 });
        }
        Self::new(r, c, rows.concat())
    }

    pub fn identity(k: usize) -> Self {
        let mut entries = vec![0.0; k * k];
        for i in 0..k {
            entries[i * k + i] = 1.0;
        }
        Self { rows: k, cols: k, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_na(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    /// Number of singular values above `rank_rel · σ_max`; 0 for a zero matrix.
    pub fn rank(&self, tol: &Tolerance) -> usize {
        let sv = self.to_na().singular_values();
        count_above_cutoff(sv.as_slice(), tol.rank_rel)
    }

    /// Moore-Penrose left inverse of a matrix with full column rank,
    /// computed from the SVD.
    pub fn pseudo_inverse(&self, tol: &Tolerance) -> Result<Matrix, KernelError> {
        let svd = self.to_na().svd(true, true);
        let sv = svd.singular_values.as_slice();
        let rank = count_above_cutoff(sv, tol.rank_rel);
        if rank < self.cols {
            return Err(KernelError::ColumnRankDeficient { rank, cols: self.cols });
        }
        let u = svd.u.as_ref().expect("svd with u");
        let v_t = svd.v_t.as_ref().expect("svd with v_t");
        // pinv = V Σ⁻¹ Uᵀ
        let mut sigma_inv = DMatrix::zeros(sv.len(), sv.len());
        for (i, &s) in sv.iter().enumerate() {
            sigma_inv[(i, i)] = 1.0 / s;
        }
        let pinv = v_t.transpose() * sigma_inv * u.transpose();
        Ok(Self::from_na(&pinv))
    }

    /// Orthonormal basis of the right nullspace at the given tolerance
    /// (possibly empty).
    pub fn nullspace(&self, tol: &Tolerance) -> Vec<Vec<f64>> {
        // Pad with zero rows so the SVD carries a full set of right singular
        // vectors even for wide matrices.
        let mut na = DMatrix::zeros(self.rows.max(self.cols), self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                na[(i, j)] = self.get(i, j);
            }
        }
        let svd = na.svd(false, true);
        let sv = svd.singular_values.as_slice();
        let cutoff = cutoff_value(sv, tol.rank_rel);
        let v_t = svd.v_t.as_ref().expect("svd with v_t");
        let mut basis = Vec::new();
        for (i, &s) in sv.iter().enumerate() {
            if s <= cutoff {
                basis.push(v_t.row(i).iter().copied().collect());
            }
        }
        basis
    }

    /// Eigendecomposition of a symmetric matrix: eigenvalues in descending
    /// order with matching orthonormal eigenvector columns.
    pub fn sym_eigen(&self, tol: &Tolerance) -> Result<SymEigen, KernelError> {
        if self.rows != self.cols {
            return Err(KernelError::NotSymmetric);
        }
        let scale = self.entries.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol.class_abs * scale.max(1.0) {
                    return Err(KernelError::NotSymmetric);
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(self.to_na());
        let mut order: Vec<usize> = (0..self.rows).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = vec![0.0; self.rows * self.rows];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..self.rows {
                vectors[row * self.rows + col] = eig.eigenvectors[(row, src)];
            }
        }
        Ok(SymEigen {
            values,
            vectors: Matrix { rows: self.rows, cols: self.rows, entries: vectors },
        })
    }

    /// Determinant of a square matrix.
    pub fn determinant(&self) -> Result<f64, KernelError> {
        if self.rows != self.cols {
            return Err(KernelError::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(self.to_na().determinant())
    }
}

/// Symmetric eigendecomposition `S = V · diag(values) · Vᵀ`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: Matrix,
}

impl SymEigen {
    /// Eigenvector for `values[k]`.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, k)).collect()
    }
}

fn cutoff_value(sv: &[f64], rank_rel: f64) -> f64 {
    let sigma_max = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    rank_rel * sigma_max
}

fn count_above_cutoff(sv: &[f64], rank_rel: f64) -> usize {
    let cutoff = cutoff_value(sv, rank_rel);
    if cutoff == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Dot product helper used throughout the crate.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm helper.
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance helper.
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
