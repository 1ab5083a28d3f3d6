//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Rounds follow a fixed round-robin tournament over index pairs, so every
//! sweep touches each unordered pair exactly once and the pairs within a
//! round are disjoint.  Disjointness makes the per-round update
//! embarrassingly parallel *and* order-independent: the result is
//! bit-identical whether rounds are applied serially or across threads.

use rayon::prelude::*;

use super::{DenseMatrix, DenseSymMatrix, NumError, Result};

/// Output of [`eigh`].
#[derive(Debug, Clone)]
pub struct EighResult {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `eigenvalues[j]`.
    pub vectors: DenseMatrix,
    /// Number of full sweeps performed.
    pub sweeps: usize,
    /// `max_j ||A v_j - lambda_j v_j||_inf`, measured against the input.
    pub max_residual: f64,
}

const MAX_SWEEPS: usize = 64;
/// Matrix order above which round updates are spread over threads.
const PAR_ORDER: usize = 192;

/// Full eigendecomposition of a dense symmetric matrix.
///
/// Terminates when a sweep leaves every off-diagonal entry below
/// `1e-14 * (1 + ||A||_inf)`; the returned residual is checked against the
/// original matrix and bounded by `1e-10 * (1 + ||A||_inf)`.
pub fn eigh(m: &DenseSymMatrix) -> Result<EighResult> {
    let n = m.order();
    let scale = 1.0 + m.norm_inf();
    let tol = 1e-14 * scale;

    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);

    let mut sweeps = 0;
    if n > 1 {
        let schedule = tournament_schedule(n);
        loop {
            let mut rotated_any = false;
            for round in &schedule {
                rotated_any |= apply_round(&mut a, &mut v, round, tol);
            }
            sweeps += 1;
            if !rotated_any {
                break;
            }
            if sweeps >= MAX_SWEEPS {
                let off = max_off_diag(&a);
                return Err(NumError::NotConverged {
                    what: "jacobi eigensolver",
                    iterations: sweeps,
                    residual: off,
                });
            }
        }
    }

    // Sort ascending; tie order is the (stable) diagonal position.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| a.get(p, p).partial_cmp(&a.get(q, q)).unwrap().then(p.cmp(&q)));
    let eigenvalues: Vec<f64> = order.iter().map(|&p| a.get(p, p)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let mut col = v.col(old_j);
        // Fix the sign so the largest-magnitude entry (first on ties) is
        // positive; keeps output independent of rotation history details.
        let mut lead = 0usize;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
        vectors.set_col(new_j, &col);
    }

    let max_residual = residual(m, &eigenvalues, &vectors);
    let allowance = 1e-10 * scale;
    if max_residual > allowance {
        return Err(NumError::NotConverged {
            what: "jacobi residual check",
            iterations: sweeps,
            residual: max_residual,
        });
    }

    Ok(EighResult { eigenvalues, vectors, sweeps, max_residual })
}

/// Round-robin tournament: `n` padded to even `m`, `m - 1` rounds of
/// `m / 2` disjoint pairs covering every unordered pair exactly once.
fn tournament_schedule(n: usize) -> Vec<Vec<(usize, usize)>> {
    let m = n + (n % 2);
    let mut arr: Vec<usize> = (0..m).collect();
    let mut rounds = Vec::with_capacity(m - 1);
    for _ in 0..m - 1 {
        let mut pairs = Vec::with_capacity(m / 2);
        for i in 0..m / 2 {
            let (p, q) = (arr[i], arr[m - 1 - i]);
            if p < n && q < n {
                pairs.push((p.min(q), p.max(q)));
            }
        }
        pairs.sort_unstable();
        rounds.push(pairs);
        // Rotate positions 1..m right by one, keeping position 0 fixed.
        let last = arr[m - 1];
        for i in (2..m).rev() {
            arr[i] = arr[i - 1];
        }
        arr[1] = last;
    }
    rounds
}

struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
}

/// Applies one tournament round of disjoint rotations.  Returns whether any
/// rotation exceeded the threshold.
fn apply_round(a: &mut DenseSymMatrix, v: &mut DenseMatrix, pairs: &[(usize, usize)], tol: f64) -> bool {
    let rotations: Vec<Rotation> = pairs
        .iter()
        .filter_map(|&(p, q)| {
            let apq = a.get(p, q);
            if apq.abs() <= tol {
                return None;
            }
            let app = a.get(p, p);
            let aqq = a.get(q, q);
            let tau = (aqq - app) / (2.0 * apq);
            let t = if tau >= 0.0 {
                1.0 / (tau + (1.0 + tau * tau).sqrt())
            } else {
                -1.0 / (-tau + (1.0 + tau * tau).sqrt())
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            Some(Rotation { p, q, c, s })
        })
        .collect();
    if rotations.is_empty() {
        return false;
    }

    let n = a.order();
    // Phase 1: A <- J^T A combines rows p and q of each rotation.  The row
    // pairs are disjoint, so rotations can run in parallel by stealing the
    // two rows out of the backing storage.
    {
        let base = a.a.as_mut_ptr() as usize;
        let apply_rows = |r: &Rotation| {
            // Safety: each rotation owns exactly rows r.p and r.q, and the
            // round's pairs are pairwise disjoint.
            let rp = unsafe { std::slice::from_raw_parts_mut((base as *mut f64).add(r.p * n), n) };
            let rq = unsafe { std::slice::from_raw_parts_mut((base as *mut f64).add(r.q * n), n) };
            for j in 0..n {
                let x = rp[j];
                let y = rq[j];
                rp[j] = r.c * x - r.s * y;
                rq[j] = r.s * x + r.c * y;
            }
        };
        if n >= PAR_ORDER {
            rotations.par_iter().for_each(apply_rows);
        } else {
            rotations.iter().for_each(apply_rows);
        }
    }
    // Phase 2: A <- A J combines columns p and q within each row.
    {
        let apply_cols = |row: &mut [f64]| {
            for r in &rotations {
                let x = row[r.p];
                let y = row[r.q];
                row[r.p] = r.c * x - r.s * y;
                row[r.q] = r.s * x + r.c * y;
            }
        };
        if n >= PAR_ORDER {
            a.a.par_chunks_mut(n).for_each(apply_cols);
        } else {
            a.a.chunks_mut(n).for_each(apply_cols);
        }
    }
    // Zero the eliminated entries exactly; the 2x2 diagonalisation has no
    // interference from other pairs in the round.
    for r in &rotations {
        a.set_sym(r.p, r.q, 0.0);
    }
    // Accumulate V <- V J (column operation, per-row independent).
    {
        let apply_v = |row: &mut [f64]| {
            for r in &rotations {
                let x = row[r.p];
                let y = row[r.q];
                row[r.p] = r.c * x - r.s * y;
                row[r.q] = r.s * x + r.c * y;
            }
        };
        if n >= PAR_ORDER {
            v.a.par_chunks_mut(n).for_each(apply_v);
        } else {
            v.a.chunks_mut(n).for_each(apply_v);
        }
    }
    true
}

fn max_off_diag(a: &DenseSymMatrix) -> f64 {
    let n = a.order();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(a.get(i, j).abs());
        }
    }
    best
}

fn residual(m: &DenseSymMatrix, eigenvalues: &[f64], vectors: &DenseMatrix) -> f64 {
    let n = m.order();
    let per_col = |j: usize| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let row = m.row(i);
            let mut acc = 0.0;
            for k in 0..n {
                acc += row[k] * vectors.get(k, j);
            }
            worst = worst.max((acc - eigenvalues[j] * vectors.get(i, j)).abs());
        }
        worst
    };
    if n >= PAR_ORDER {
        (0..n).into_par_iter().map(per_col).reduce(|| 0.0, f64::max)
    } else {
        (0..n).map(per_col).fold(0.0, f64::max)
    }
}
