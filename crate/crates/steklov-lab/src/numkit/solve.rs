//! Symmetric positive definite solves: dense Cholesky for small orders,
//! Jacobi-preconditioned conjugate gradients above [`super::DENSE_LIMIT`].

use super::band::{bandwidth_under, rcm_order, BandCholesky};
use super::{DenseSymMatrix, NumError, Result, SparseSymMatrix, DENSE_LIMIT};

/// Lower-triangular Cholesky factor `L` with `A = L L^T`, reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    /// Row-major lower triangle, packed: row `i` occupies
    /// `l[i * (i + 1) / 2 .. i * (i + 1) / 2 + i + 1]`.
    l: Vec<f64>,
}

/// Factors a dense symmetric matrix, failing on non-positive pivots.
pub fn cholesky_dense(a: &DenseSymMatrix) -> Result<DenseCholesky> {
    let n = a.order();
    let mut l = vec![0.0f64; n * (n + 1) / 2];
    let row_start = |i: usize| i * (i + 1) / 2;
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            let (ri, rj) = (row_start(i), row_start(j));
            for k in 0..j {
                sum -= l[ri + k] * l[rj + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(NumError::NotPositiveDefinite {
                        context: "dense cholesky",
                        index: i,
                        pivot: sum,
                    });
                }
                l[ri + i] = sum.sqrt();
            } else {
                l[ri + j] = sum / l[rj + j];
            }
        }
    }
    Ok(DenseCholesky { n, l })
}

impl DenseCholesky {
    /// Factor order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.forward_in_place(x);
        self.backward_in_place(x);
    }

    /// Forward substitution only: solves `L y = b` in place.
    pub fn forward_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let row_start = |i: usize| i * (i + 1) / 2;
        for i in 0..self.n {
            let ri = row_start(i);
            let mut sum = x[i];
            for k in 0..i {
                sum -= self.l[ri + k] * x[k];
            }
            x[i] = sum / self.l[ri + i];
        }
    }

    /// Backward substitution only: solves `L^T x = y` in place.
    pub fn backward_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let row_start = |i: usize| i * (i + 1) / 2;
        for i in (0..self.n).rev() {
            let mut sum = x[i];
            for k in (i + 1)..self.n {
                sum -= self.l[row_start(k) + i] * x[k];
            }
            x[i] = sum / self.l[row_start(i) + i];
        }
    }

    /// Solves for a fresh right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Entry `L[i][j]` of the factor (`j <= i`).
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i);
        self.l[i * (i + 1) / 2 + j]
    }
}

/// Solves `A x = b` for sparse symmetric positive definite `A`.
///
/// Below [`DENSE_LIMIT`] the matrix is densified and factored; otherwise a
/// Jacobi-preconditioned conjugate gradient iteration runs to relative
/// residual `1e-12` with an iteration cap of `50 n`.
pub fn solve_spd(a: &SparseSymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.order();
    if b.len() != n {
        return Err(NumError::BadInput(format!(
            "rhs length {} does not match order {n}",
            b.len()
        )));
    }
    if let Some((i, _)) = b.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(NumError::NonFinite { row: i, col: 0 });
    }
    if b.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    if n < DENSE_LIMIT {
        let chol = cholesky_dense(&a.to_dense()?)?;
        Ok(chol.solve(b))
    } else {
        pcg(a, b, 1e-12, 50 * n)
    }
}

/// A reusable factorization of a sparse SPD matrix, dispatched on size:
/// dense Cholesky below [`DENSE_LIMIT`], banded Cholesky under an RCM
/// ordering while the band fits `band_cap` entries, Jacobi-PCG otherwise.
pub(crate) enum SpdFactor<'a> {
    Dense(DenseCholesky),
    Band(BandCholesky),
    Iterative(&'a SparseSymMatrix),
}

impl<'a> SpdFactor<'a> {
    pub(crate) fn build(a: &'a SparseSymMatrix, band_cap: u64) -> Result<Self> {
        let n = a.order();
        if n < DENSE_LIMIT {
            return Ok(SpdFactor::Dense(cholesky_dense(&a.to_dense()?)?));
        }
        let perm = rcm_order(a);
        let bw = bandwidth_under(a, &perm) as u64;
        if (n as u64) * (bw + 1) <= band_cap {
            return Ok(SpdFactor::Band(BandCholesky::factor(a, &perm)?));
        }
        Ok(SpdFactor::Iterative(a))
    }


    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdFactor::Dense(c) => Ok(c.solve(b)),
            SpdFactor::Band(band) => Ok(band.solve(b)),
            SpdFactor::Iterative(a) => {
                if b.iter().all(|&v| v == 0.0) {
                    Ok(vec![0.0; a.order()])
                } else {
                    pcg(a, b, 1e-12, 50 * a.order())
                }
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub(crate) fn pcg(a: &SparseSymMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.order();
    let diag = a.diag();
    for (i, &d) in diag.iter().enumerate() {
        if d <= 0.0 {
            return Err(NumError::NotPositiveDefinite {
                context: "jacobi preconditioner",
                index: i,
                pivot: d,
            });
        }
    }
    let b_norm = norm2(b);
    let target = rel_tol * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 0..max_iter {
        if norm2(&r) <= target {
            return Ok(x);
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(NumError::NotPositiveDefinite {
                context: "conjugate gradients",
                index: it,
                pivot: pap,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm2(&r) <= target {
        return Ok(x);
    }
    Err(NumError::NotConverged {
        what: "conjugate gradients",
        iterations: max_iter,
        residual: norm2(&r) / b_norm,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
