//! Self-contained numerical kernels for symmetric problems.
//!
//! | op                   | summary                                                  |
//! |----------------------|----------------------------------------------------------|
//! | [`eigh`]             | full eigendecomposition of a dense symmetric matrix      |
//! | [`solve_spd`]        | solve `A x = b` for symmetric positive definite `A`      |
//! | [`schur_complement`] | eliminate a vertex block from a sparse symmetric matrix  |
//! | [`cholesky_dense`]   | reusable dense Cholesky factorisation                    |
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! outputs regardless of thread count, because parallel stages only ever
//! partition writes over disjoint rows.

mod band;
mod eigh;
mod pencil;
mod schur;
mod solve;

pub use band::{bandwidth_under, rcm_order, BandCholesky};
pub use eigh::{eigh, EighResult};
pub use pencil::{pencil_smallest, PencilModes};
pub use schur::schur_complement;
pub use solve::{cholesky_dense, solve_spd, DenseCholesky};

use thiserror::Error;

/// Order below which direct dense factorisations are preferred over
/// iterative or banded paths.
pub const DENSE_LIMIT: usize = 500;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum NumError {
    /// Structurally invalid input (dimension mismatch, bad index, ...).
    #[error("invalid input: {0}")]
    BadInput(String),
    /// A matrix claimed symmetric deviates from its transpose too much.
    #[error("matrix asymmetry {defect:.3e} exceeds allowance {allowance:.3e}")]
    Asymmetric { defect: f64, allowance: f64 },
    /// A non-finite entry was encountered where a real number was required.
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    /// A factorisation hit a non-positive pivot.
    #[error("{context}: non-positive pivot {pivot:.6e} at index {index}")]
    NotPositiveDefinite {
        context: &'static str,
        index: usize,
        pivot: f64,
    },
    /// An iterative method ran out of its iteration budget.
    #[error("{what} did not converge within {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// The interior block of a Schur elimination is singular.
    #[error("interior block is singular or indefinite: {0}")]
    SingularInterior(String),
}

/// Result alias used throughout the numerical layer.
pub type Result<T> = std::result::Result<T, NumError>;

/// Dense symmetric matrix, stored row-major over the full square.
///
/// Symmetry is a construction invariant: every mutator writes both sides,
/// and [`DenseSymMatrix::from_raw`] rejects asymmetric data outright.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseSymMatrix {
    /// Zero matrix of the given order (must be positive).
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(NumError::BadInput("matrix order must be positive".into()));
        }
        Ok(Self { n, a: vec![0.0; n * n] })
    }

    /// Builds from a row-major slice, rejecting non-finite entries and
    /// asymmetry beyond `1e-8 * max(1, ||A||_inf)`. Off-diagonal pairs are
    /// averaged so the stored matrix is exactly symmetric.
    pub fn from_raw(n: usize, data: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(NumError::BadInput("matrix order must be positive".into()));
        }
        if data.len() != n * n {
            return Err(NumError::BadInput(format!(
                "expected {} entries for order {}, got {}",
                n * n,
                n,
                data.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if !data[i * n + j].is_finite() {
                    return Err(NumError::NonFinite { row: i, col: j });
                }
            }
        }
        let norm = inf_norm(n, data);
        let allowance = 1e-8 * norm.max(1.0);
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                defect = defect.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if defect > allowance {
            return Err(NumError::Asymmetric { defect, allowance });
        }
        let mut a = data.to_vec();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = avg;
                a[j * n + i] = avg;
            }
        }
        Ok(Self { n, a })
    }

    /// Builds by evaluating `f(i, j)` on the upper triangle and mirroring.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(NumError::NonFinite { row: i, col: j });
                }
                m.a[i * n + j] = v;
                m.a[j * n + i] = v;
            }
        }
        Ok(m)
    }

    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry accessor.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Writes `v` into both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    /// Adds `v` into both `(i, j)` and `(j, i)` (diagonal added once).
    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
        if i != j {
            self.a[j * self.n + i] += v;
        }
    }

    /// Row-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// Matrix infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        inf_norm(self.n, &self.a)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
    }
}

fn inf_norm(n: usize, a: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += a[i * n + j].abs();
        }
        best = best.max(s);
    }
    best
}

/// Dense rectangular matrix (row-major); used for eigenvector blocks and
/// multi-column solves.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, a: vec![0.0; rows * cols] }
    }

    /// Identity of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry accessor.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    /// Entry mutator.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    /// Row `i` as a mutable slice.
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.a[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Row-major storage, mutable.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.a
    }

    /// Copies column `j` into a fresh vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Overwrites column `j`.
    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self.set(i, j, v[i]);
        }
    }
}

/// Sparse symmetric matrix in coordinate form with a compressed adjacency
/// built once at construction.  Entries are stored once per unordered pair
/// `(i, j)` with `i <= j`; [`SparseSymMatrix::matvec`] expands them.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    /// `(i, j, v)` with `i <= j`, sorted lexicographically, no duplicates.
    entries: Vec<(u32, u32, f64)>,
    /// CSR over the symmetrically expanded pattern: `adj[ptr[i]..ptr[i+1]]`
    /// holds `(j, v)` for every stored neighbour of `i`, including `i`.
    ptr: Vec<usize>,
    adj: Vec<(u32, f64)>,
}

impl SparseSymMatrix {
    /// Builds from triplets.  Each unordered pair may appear at most once;
    /// either orientation is accepted.  Explicit zeros are kept.
    pub fn new(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(NumError::BadInput("matrix order must be positive".into()));
        }
        let mut entries: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(NumError::BadInput(format!(
                    "triplet index ({i}, {j}) out of range for order {n}"
                )));
            }
            if !v.is_finite() {
                return Err(NumError::NonFinite { row: i, col: j });
            }
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            entries.push((lo as u32, hi as u32, v));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(NumError::BadInput(format!(
                    "duplicate entry for pair ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut degree = vec![0usize; n];
        for &(i, j, _) in &entries {
            degree[i as usize] += 1;
            if i != j {
                degree[j as usize] += 1;
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + degree[i];
        }
        let mut fill = ptr.clone();
        let mut adj = vec![(0u32, 0.0f64); ptr[n]];
        for &(i, j, v) in &entries {
            adj[fill[i as usize]] = (j, v);
            fill[i as usize] += 1;
            if i != j {
                adj[fill[j as usize]] = (i, v);
                fill[j as usize] += 1;
            }
        }
        // Sort each row's neighbours for deterministic traversal order.
        for i in 0..n {
            adj[ptr[i]..ptr[i + 1]].sort_by_key(|&(j, _)| j);
        }
        Ok(Self { n, entries, ptr, adj })
    }

    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Stored entry count (unordered pairs).
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Stored triplets, `(i, j, v)` with `i <= j`, sorted.
    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    /// Neighbours of row `i` in the expanded pattern, sorted by column.
    pub fn row_entries(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[self.ptr[i]..self.ptr[i + 1]]
    }

    /// Diagonal as a vector (zeros where unset).
    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i as usize] = v;
            }
        }
        d
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for &(j, v) in self.row_entries(i) {
                acc += v * x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// Densifies (intended for small orders and tests).
    pub fn to_dense(&self) -> Result<DenseSymMatrix> {
        let mut m = DenseSymMatrix::zeros(self.n)?;
        for &(i, j, v) in &self.entries {
            m.set_sym(i as usize, j as usize, v);
        }
        Ok(m)
    }
}
