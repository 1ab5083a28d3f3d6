//! Schur complement of a sparse symmetric matrix onto a kept index block.
//!
//! For `A = [A_II, A_IB; A_BI, A_BB]` (I = eliminated interior, B = kept
//! block) this computes `S = A_BB - A_BI A_II^{-1} A_IB`, choosing a solver
//! for the interior by size: dense Cholesky below [`DENSE_LIMIT`], banded
//! Cholesky under a reverse Cuthill-McKee ordering when the band fits in
//! memory, preconditioned conjugate gradients otherwise.

use rayon::prelude::*;

use super::solve::SpdFactor;
use super::{DenseMatrix, DenseSymMatrix, NumError, Result, SparseSymMatrix};

/// Band storage cap (entries); above this the iterative path is used.
const BAND_CAP_ENTRIES: u64 = 50_000_000;

/// Kept columns are solved and folded into the result in blocks of this many
/// right-hand sides, so peak memory stays at `ni * COL_BLOCK` instead of
/// `ni * nb`.
const COL_BLOCK: usize = 256;

/// Eliminates everything outside `keep` (strictly ascending indices) from a
/// sparse symmetric matrix, returning the dense Schur complement indexed in
/// `keep` order.
///
/// Fails with [`NumError::SingularInterior`] when the interior block is not
/// positive definite — for graph Laplacians this happens exactly when some
/// interior component has no path to the kept block.
pub fn schur_complement(a: &SparseSymMatrix, keep: &[usize]) -> Result<DenseSymMatrix> {
    let n = a.order();
    if keep.is_empty() {
        return Err(NumError::BadInput("kept index set is empty".into()));
    }
    for w in keep.windows(2) {
        if w[0] >= w[1] {
            return Err(NumError::BadInput(
                "kept indices must be strictly ascending".into(),
            ));
        }
    }
    if *keep.last().unwrap() >= n {
        return Err(NumError::BadInput(format!(
            "kept index {} out of range for order {n}",
            keep.last().unwrap()
        )));
    }

    let nb = keep.len();
    let mut keep_pos = vec![usize::MAX; n];
    for (b, &v) in keep.iter().enumerate() {
        keep_pos[v] = b;
    }
    let interior: Vec<usize> = (0..n).filter(|&v| keep_pos[v] == usize::MAX).collect();
    let ni = interior.len();
    let mut int_pos = vec![usize::MAX; n];
    for (i, &v) in interior.iter().enumerate() {
        int_pos[v] = i;
    }

    // Split the entries into the three blocks.
    let mut bb = DenseSymMatrix::zeros(nb)?;
    let mut ii_triplets: Vec<(usize, usize, f64)> = Vec::new();
    // Per kept column: sparse interior coefficients of A_IB.
    let mut ib_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for &(i, j, v) in a.entries() {
        let (i, j) = (i as usize, j as usize);
        match (keep_pos[i], keep_pos[j]) {
            (usize::MAX, usize::MAX) => ii_triplets.push((int_pos[i], int_pos[j], v)),
            (bi, usize::MAX) => ib_cols[bi].push((int_pos[j], v)),
            (usize::MAX, bj) => ib_cols[bj].push((int_pos[i], v)),
            (bi, bj) => {
                let (lo, hi) = (bi.min(bj), bi.max(bj));
                bb.set_sym(lo, hi, v);
            }
        }
    }
    if ni == 0 {
        return Ok(bb);
    }
    for col in ib_cols.iter_mut() {
        col.sort_unstable_by_key(|&(i, _)| i);
    }

    let aii = SparseSymMatrix::new(ni, &ii_triplets)?;
    let solver = SpdFactor::build(&aii, BAND_CAP_ENTRIES).map_err(singularize)?;

    // S = A_BB - A_BI X, accumulated block-of-columns at a time.  Each (r, c)
    // cell is written exactly once, so the fill is deterministic; the final
    // `from_raw` averages away the solver-level roundoff asymmetry.
    let mut s = DenseMatrix::zeros(nb, nb);
    for r in 0..nb {
        for c in 0..nb {
            s.set(r, c, bb.get(r, c));
        }
    }
    let mut start = 0;
    while start < nb {
        let end = (start + COL_BLOCK).min(nb);
        let block: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|c| {
                let mut b = vec![0.0; ni];
                for &(i, v) in &ib_cols[c] {
                    b[i] = v;
                }
                solver.solve(&b).map_err(singularize)
            })
            .collect::<Result<_>>()?;
        s.as_mut_slice()
            .par_chunks_mut(nb)
            .enumerate()
            .for_each(|(r, row)| {
                for (k, x) in block.iter().enumerate() {
                    let mut acc = 0.0;
                    for &(i, v) in &ib_cols[r] {
                        acc += v * x[i];
                    }
                    row[start + k] -= acc;
                }
            });
        start = end;
    }
    DenseSymMatrix::from_raw(nb, s.as_slice())
}

/// Maps solver breakdowns on the interior block to [`NumError::SingularInterior`].
fn singularize(e: NumError) -> NumError {
    match e {
        NumError::NotPositiveDefinite { context, index, pivot } => NumError::SingularInterior(
            format!("{context} hit pivot {pivot:.3e} at interior index {index}"),
        ),
        NumError::NotConverged { what, iterations, residual } => NumError::SingularInterior(
            format!("{what} stalled after {iterations} iterations (residual {residual:.3e})"),
        ),
        other => other,
    }
}
