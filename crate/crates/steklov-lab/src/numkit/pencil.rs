//! Smallest eigenpairs of the pencil `L x = sigma M x` where `M` is diagonal
//! and positive semidefinite.
//!
//! The intended instances are Dirichlet-to-Neumann problems: `L` a stiffness
//! or Laplacian matrix and `M` a mass supported on a boundary index set `B`.
//! The finite eigenvalues of the pencil are exactly the eigenvalues of the
//! Schur complement of `L` onto `B` taken against the boundary mass, but the
//! iteration below never forms that dense complement: it runs block inverse
//! iteration with Rayleigh-Ritz extraction, where each application solves one
//! sparse SPD system with the shifted matrix `K = L + alpha M`.  The shift
//! moves the pencil by exactly `alpha` (the interior block is untouched, so
//! the Schur complement of `K` is `S + alpha M`), which makes `K` definite
//! even though `L` alone has the constant vector in its kernel.

use rayon::prelude::*;

use super::solve::SpdFactor;
use super::{eigh, DenseSymMatrix, NumError, Result, SparseSymMatrix};

/// Relative size of the definiteness shift `alpha`.
const SHIFT_REL: f64 = 1e-6;
/// Extra subspace columns beyond the requested count.
const BLOCK_BUFFER: usize = 6;
/// Iteration cap.
const MAX_ITERS: usize = 500;
/// Ritz-value stagnation tolerance (relative).
const STAGNATION_TOL: f64 = 1e-12;
/// Band storage cap for the shifted factor.
const BAND_CAP_ENTRIES: u64 = 50_000_000;

/// Converged smallest modes of the pencil.
#[derive(Debug, Clone)]
pub struct PencilModes {
    /// Ascending eigenvalues, recomputed as exact-form Rayleigh quotients.
    pub sigmas: Vec<f64>,
    /// Full-space eigenvectors, M-orthonormal on the support of `M`.
    pub vectors: Vec<Vec<f64>>,
    /// Block iterations used.
    pub iterations: usize,
    /// Worst scaled residual `|L u - sigma M u| / ((1 + max diag L) |u|)`.
    pub max_residual: f64,
}

/// Computes the `k` smallest pencil eigenpairs.
///
/// `m_diag` must be nonnegative with nonempty support; `k` may not exceed the
/// support size.  The result is deterministic for fixed inputs and `seed`.
pub fn pencil_smallest(
    l: &SparseSymMatrix,
    m_diag: &[f64],
    k: usize,
    seed: u64,
) -> Result<PencilModes> {
    let n = l.order();
    if m_diag.len() != n {
        return Err(NumError::BadInput(format!(
            "mass diagonal length {} does not match order {n}",
            m_diag.len()
        )));
    }
    for (i, &m) in m_diag.iter().enumerate() {
        if !m.is_finite() || m < 0.0 {
            return Err(NumError::BadInput(format!(
                "mass diagonal entry {i} is {m:e}; need finite and nonnegative"
            )));
        }
    }
    let boundary: Vec<usize> = (0..n).filter(|&i| m_diag[i] > 0.0).collect();
    let nb = boundary.len();
    if nb == 0 {
        return Err(NumError::BadInput("mass diagonal is identically zero".into()));
    }
    if k == 0 || k > nb {
        return Err(NumError::BadInput(format!(
            "requested {k} modes from a mass support of size {nb}"
        )));
    }

    let diag = l.diag();
    let rho = boundary
        .iter()
        .map(|&i| diag[i] / m_diag[i])
        .fold(0.0f64, f64::max)
        .max(1.0);
    let alpha = SHIFT_REL * rho;

    // K = L + alpha M.
    let mut shifted: std::collections::BTreeMap<(usize, usize), f64> = std::collections::BTreeMap::new();
    for &(i, j, v) in l.entries() {
        shifted.insert((i as usize, j as usize), v);
    }
    for &i in &boundary {
        *shifted.entry((i, i)).or_insert(0.0) += alpha * m_diag[i];
    }
    let triplets: Vec<(usize, usize, f64)> =
        shifted.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    let kmat = SparseSymMatrix::new(n, &triplets)?;
    let factor = SpdFactor::build(&kmat, BAND_CAP_ENTRIES)?;

    let p = (k + BLOCK_BUFFER).min(nb);
    let dot_m = |u: &[f64], v: &[f64]| -> f64 {
        boundary.iter().map(|&i| u[i] * m_diag[i] * v[i]).sum()
    };

    // Deterministic full-space start block, M-orthonormalized.
    let mut basis: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut v = vec![0.0; n];
            for (t, &i) in boundary.iter().enumerate() {
                v[i] = unit_hash(seed, j as u64, t as u64);
            }
            v
        })
        .collect();
    orthonormalize(&mut basis, &dot_m, None)?;

    let scale = 1.0 + diag.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
    let mut theta_prev: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERS {
        iterations += 1;
        // One block application of (S + alpha M)^{-1} M via full solves.
        let rhs_block: Vec<Vec<f64>> = basis
            .iter()
            .map(|v| {
                let mut b = vec![0.0; n];
                for &i in &boundary {
                    b[i] = m_diag[i] * v[i];
                }
                b
            })
            .collect();
        let mut w: Vec<Vec<f64>> = rhs_block
            .par_iter()
            .map(|b| factor.solve(b))
            .collect::<Result<_>>()?;

        // M-orthonormalize W, tracking the triangular transform so the Ritz
        // matrix can be assembled from boundary data alone:
        // (S + alpha M) W = M V  implies  A = Wt' M V R^{-1} after W = W' R.
        let mut r = vec![vec![0.0f64; p]; p];
        orthonormalize(&mut w, &dot_m, Some(&mut r))?;

        let mut a_full = vec![vec![0.0f64; p]; p];
        for (rr, wrow) in w.iter().enumerate() {
            for (c, rhs) in rhs_block.iter().enumerate() {
                a_full[rr][c] = boundary.iter().map(|&i| wrow[i] * rhs[i]).sum();
            }
        }
        // Solve X R = A (R upper triangular) row by row.
        let mut x = vec![vec![0.0f64; p]; p];
        for rr in 0..p {
            for j in 0..p {
                let mut sum = a_full[rr][j];
                for s in 0..j {
                    sum -= x[rr][s] * r[s][j];
                }
                x[rr][j] = sum / r[j][j];
            }
        }
        let ritz = DenseSymMatrix::from_fn(p, |i, j| 0.5 * (x[i][j] + x[j][i]))?;
        let eig = eigh(&ritz)?;
        let theta = eig.eigenvalues.clone();

        // Rotate the basis into Ritz order.
        let mut next: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
        for (j, out) in next.iter_mut().enumerate() {
            for (s, ws) in w.iter().enumerate() {
                let q = eig.vectors.get(s, j);
                if q != 0.0 {
                    for (o, &wv) in out.iter_mut().zip(ws.iter()) {
                        *o += q * wv;
                    }
                }
            }
        }
        basis = next;

        let stagnated = theta_prev.len() == theta.len()
            && theta
                .iter()
                .take(k)
                .zip(theta_prev.iter())
                .all(|(t, tp)| (t - tp).abs() <= STAGNATION_TOL * (1.0 + t.abs()));
        theta_prev = theta;
        if stagnated && iterations >= 3 {
            converged = true;
            break;
        }
    }

    // Exact-form Rayleigh values and residuals for the first k columns.
    let mut pairs: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(k);
    for v in basis.iter().take(k) {
        let mut u = v.clone();
        let nrm = dot_m(&u, &u).sqrt();
        if nrm > 0.0 {
            for x in u.iter_mut() {
                *x /= nrm;
            }
        }
        let mut lu = vec![0.0; n];
        l.matvec(&u, &mut lu);
        let num: f64 = u.iter().zip(&lu).map(|(a, b)| a * b).sum();
        let sigma = num / dot_m(&u, &u);
        let mut res2 = 0.0;
        let mut unorm2 = 0.0;
        for i in 0..n {
            let r = lu[i] - sigma * m_diag[i] * u[i];
            res2 += r * r;
            unorm2 += u[i] * u[i];
        }
        let res = res2.sqrt() / (scale * unorm2.sqrt());
        pairs.push((sigma, u, res));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let max_residual = pairs.iter().map(|p| p.2).fold(0.0f64, f64::max);

    if !converged {
        return Err(NumError::NotConverged {
            what: "pencil subspace iteration",
            iterations,
            residual: max_residual,
        });
    }

    Ok(PencilModes {
        sigmas: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
        iterations,
        max_residual,
    })
}

/// Modified Gram-Schmidt in the inner product `dot`; optionally records the
/// upper-triangular coefficients with `r[i][j] = <q_i, w_j>` and
/// `r[j][j] = |w_j|` so that `W_in = W_out R`.
fn orthonormalize(
    block: &mut [Vec<f64>],
    dot: &impl Fn(&[f64], &[f64]) -> f64,
    mut r_out: Option<&mut Vec<Vec<f64>>>,
) -> Result<()> {
    let p = block.len();
    for j in 0..p {
        for i in 0..j {
            let (head, tail) = block.split_at_mut(j);
            let proj = dot(&head[i], &tail[0]);
            for (t, h) in tail[0].iter_mut().zip(head[i].iter()) {
                *t -= proj * h;
            }
            if let Some(r) = r_out.as_deref_mut() {
                r[i][j] = proj;
            }
        }
        let nrm = dot(&block[j], &block[j]).sqrt();
        if !(nrm > 1e-300) {
            return Err(NumError::NotConverged {
                what: "pencil block orthonormalization",
                iterations: j,
                residual: nrm,
            });
        }
        for x in block[j].iter_mut() {
            *x /= nrm;
        }
        if let Some(r) = r_out.as_deref_mut() {
            r[j][j] = nrm;
        }
    }
    Ok(())
}

/// Deterministic hash to [-0.5, 0.5).
fn unit_hash(seed: u64, a: u64, b: u64) -> f64 {
    let mut x = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}
