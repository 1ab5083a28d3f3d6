//! Discrete Steklov spectra of graphs with boundary.
//!
//! The spectrum is computed by reducing the Laplacian to the boundary
//! (Dirichlet-to-Neumann map, a Schur complement) and diagonalising the
//! result.  An independent brute-force oracle locates the same values as
//! roots of `det(L - sigma * diag(1_B))` via inertia counts, so the two
//! paths validate each other without sharing code.
//!
//! | op                     | summary                                          |
//! |------------------------|--------------------------------------------------|
//! | [`dtn_matrix`]         | boundary reduction of the Laplacian              |
//! | [`steklov_spectrum`]   | eigenvalues, boundary modes, harmonic extensions |
//! | [`steklov_sigma_k`]    | leading eigenvalues only, sparse route           |
//! | [`harmonic_extension`] | energy-minimising extension of boundary data     |
//! | [`steklov_bruteforce`] | small-graph oracle via inertia bisection         |

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::graphs::BoundaryGraph;
use crate::numkit::{
    self, cholesky_dense, rcm_order, BandCholesky, DenseCholesky, DenseMatrix, DenseSymMatrix,
    NumError, SparseSymMatrix,
};

/// Errors from the Steklov layer.
#[derive(Debug, Error)]
pub enum SteklovError {
    #[error("invalid input: {0}")]
    BadInput(String),
    /// Some interior connected component never touches the boundary, so
    /// the interior block is singular and the reduction is undefined.
    #[error("interior component {{{}}} has no edge path to the boundary", format_vertices(.vertices))]
    DetachedInterior { vertices: Vec<usize> },
    #[error("oracle failure: {0}")]
    OracleFailed(String),
    /// A computed spectrum failed one of its own invariants.
    #[error("spectrum invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn format_vertices(vs: &[usize]) -> String {
    let head: Vec<String> = vs.iter().take(8).map(|v| v.to_string()).collect();
    let tail = if vs.len() > 8 { ", ..." } else { "" };
    format!("{}{}", head.join(", "), tail)
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, SteklovError>;

/// Residual diagnostics attached to a computed spectrum.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumResiduals {
    /// Worst eigenpair residual of the boundary eigenproblem.
    pub eigenpair: f64,
    /// Worst interior Laplacian row residual over all extensions.
    pub harmonic: f64,
    /// Worst defect `|q(extension) - sigma|` over all unit modes.
    pub rayleigh: f64,
}

/// A discrete Steklov spectrum with its eigenmodes and extensions.
#[derive(Debug, Clone)]
pub struct SteklovSpectrum {
    /// Eigenvalues in ascending order, one per boundary vertex.
    pub sigmas: Vec<f64>,
    /// Boundary vertex ids (ascending), indexing the mode rows.
    pub boundary: Vec<usize>,
    /// Column `j` is the `j`-th eigenmode on the boundary, orthonormal in
    /// `l^2(B)`.
    pub boundary_modes: DenseMatrix,
    /// Column `j` is the harmonic extension of mode `j` to all vertices.
    pub extensions: DenseMatrix,
    /// Number of eigenvalues within zero tolerance of 0; equals the number
    /// of connected components when every component meets the boundary.
    pub zero_multiplicity: usize,
    /// Numerical quality report.
    pub residuals: SpectrumResiduals,
}

/// Serialised form of a spectrum:
/// `{"sigmas": [...], "boundary": [...], "residuals": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub sigmas: Vec<f64>,
    pub boundary: Vec<usize>,
    pub residuals: BTreeMap<String, f64>,
}

impl SteklovSpectrum {
    /// Canonical JSON document for this spectrum.
    pub fn to_json(&self) -> String {
        let mut residuals = BTreeMap::new();
        residuals.insert("eigenpair".to_string(), self.residuals.eigenpair);
        residuals.insert("harmonic".to_string(), self.residuals.harmonic);
        residuals.insert("rayleigh".to_string(), self.residuals.rayleigh);
        let doc = SpectrumDoc {
            sigmas: self.sigmas.clone(),
            boundary: self.boundary.clone(),
            residuals,
        };
        serde_json::to_string(&doc).expect("spectrum serialization cannot fail")
    }
}

/// Parses a spectrum document produced by [`SteklovSpectrum::to_json`].
pub fn spectrum_from_json(text: &str) -> Result<SpectrumDoc> {
    serde_json::from_str(text).map_err(|e| SteklovError::BadInput(format!("spectrum JSON: {e}")))
}

/// Zero-eigenvalue tolerance for a graph of the given maximum degree.
pub fn zero_tolerance(max_degree: usize) -> f64 {
    1e-9 * (1.0 + max_degree as f64)
}

/// Provable a-priori bound on every Steklov eigenvalue:
/// `max_{v in B} (deg(v) + #boundary neighbours of v)`.
///
/// Extending boundary data by zero shows
/// `q(f) <= sum_{v in B} f(v)^2 (2 nb_B(v) + nb_I(v))`, and the minimising
/// extension only lowers the quotient.
pub fn sigma_upper_bound(g: &BoundaryGraph) -> f64 {
    g.boundary()
        .iter()
        .map(|&v| {
            let bnd_nbrs = g.neighbors(v).filter(|&u| g.is_boundary(u)).count();
            (g.degree(v) + bnd_nbrs) as f64
        })
        .fold(0.0, f64::max)
}

/// Interior vertices must all reach the boundary through edges; returns
/// the offending component otherwise.
fn check_interior_contact(g: &BoundaryGraph) -> Result<()> {
    let n = g.n_vertices();
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = g.boundary();
    for &v in &stack {
        reached[v] = true;
    }
    while let Some(u) = stack.pop() {
        for v in g.neighbors(u) {
            if !reached[v] {
                reached[v] = true;
                stack.push(v);
            }
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&v| !reached[v]).collect();
    if missing.is_empty() {
        return Ok(());
    }
    // Report one component, not the union: walk from the first missing vertex.
    let seed = missing[0];
    let mut comp = vec![seed];
    let mut seen = vec![false; n];
    seen[seed] = true;
    let mut stack = vec![seed];
    while let Some(u) = stack.pop() {
        for v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                comp.push(v);
                stack.push(v);
            }
        }
    }
    comp.sort_unstable();
    Err(SteklovError::DetachedInterior { vertices: comp })
}

/// Dirichlet-to-Neumann matrix of the graph: the Laplacian reduced to the
/// boundary block by eliminating all interior vertices.
pub fn dtn_matrix(g: &BoundaryGraph) -> Result<DenseSymMatrix> {
    check_interior_contact(g)?;
    let lap = g.laplacian();
    let keep = g.boundary();
    Ok(numkit::schur_complement(&lap, &keep)?)
}

/// Shared interior factorisation used for harmonic extensions.
struct InteriorSystem {
    /// Ascending interior vertex ids.
    interior: Vec<usize>,
    /// Vertex id -> interior position (usize::MAX for boundary vertices).
    int_pos: Vec<usize>,
    solver: InteriorSolver,
}

enum InteriorSolver {
    Empty,
    Dense(DenseCholesky),
    Band(BandCholesky),
    Iterative(SparseSymMatrix),
}

impl InteriorSystem {
    fn build(g: &BoundaryGraph) -> Result<Self> {
        let n = g.n_vertices();
        let mut int_pos = vec![usize::MAX; n];
        let interior: Vec<usize> = (0..n).filter(|&v| !g.is_boundary(v)).collect();
        for (i, &v) in interior.iter().enumerate() {
            int_pos[v] = i;
        }
        let ni = interior.len();
        if ni == 0 {
            return Ok(Self { interior, int_pos, solver: InteriorSolver::Empty });
        }
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        for &v in &interior {
            t.push((int_pos[v], int_pos[v], g.degree(v) as f64));
        }
        for (u, v) in g.edges() {
            if !g.is_boundary(u) && !g.is_boundary(v) {
                t.push((int_pos[u], int_pos[v], -1.0));
            }
        }
        let aii = SparseSymMatrix::new(ni, &t)?;
        let map_err = |e: NumError| match e {
            NumError::NotPositiveDefinite { .. } => SteklovError::InvariantViolated(
                "interior Laplacian block was not positive definite despite boundary contact"
                    .into(),
            ),
            other => SteklovError::Num(other),
        };
        let solver = if ni < numkit::DENSE_LIMIT {
            InteriorSolver::Dense(cholesky_dense(&aii.to_dense()?).map_err(map_err)?)
        } else {
            let perm = rcm_order(&aii);
            let bw = numkit::bandwidth_under(&aii, &perm) as u64;
            if (ni as u64) * (bw + 1) <= 50_000_000 {
                InteriorSolver::Band(BandCholesky::factor(&aii, &perm).map_err(map_err)?)
            } else {
                InteriorSolver::Iterative(aii)
            }
        };
        Ok(Self { interior, int_pos, solver })
    }

    /// Harmonic extension of `boundary_values` (given in ascending-boundary
    /// order) to all vertices.
    fn extend(&self, g: &BoundaryGraph, boundary_values: &[f64]) -> Result<Vec<f64>> {
        let n = g.n_vertices();
        let boundary = g.boundary();
        let mut f = vec![0.0; n];
        for (b, &v) in boundary.iter().enumerate() {
            f[v] = boundary_values[b];
        }
        if self.interior.is_empty() {
            return Ok(f);
        }
        // rhs = -A_IB * boundary_values: interior rows of L applied to the
        // boundary data, negated.
        let ni = self.interior.len();
        let mut rhs = vec![0.0; ni];
        for (u, v) in g.edges() {
            let (ub, vb) = (g.is_boundary(u), g.is_boundary(v));
            if !ub && vb {
                rhs[self.int_pos[u]] += f[v];
            } else if ub && !vb {
                rhs[self.int_pos[v]] += f[u];
            }
        }
        let x = match &self.solver {
            InteriorSolver::Empty => unreachable!(),
            InteriorSolver::Dense(ch) => ch.solve(&rhs),
            InteriorSolver::Band(ch) => ch.solve(&rhs),
            InteriorSolver::Iterative(aii) => numkit::solve_spd(aii, &rhs)?,
        };
        for (i, &v) in self.interior.iter().enumerate() {
            f[v] = x[i];
        }
        Ok(f)
    }
}

/// Energy-minimising extension of boundary data: agrees with
/// `boundary_values` on the boundary (ascending order) and is discretely
/// harmonic at every interior vertex.
pub fn harmonic_extension(g: &BoundaryGraph, boundary_values: &[f64]) -> Result<Vec<f64>> {
    if boundary_values.len() != g.n_boundary() {
        return Err(SteklovError::BadInput(format!(
            "expected {} boundary values, got {}",
            g.n_boundary(),
            boundary_values.len()
        )));
    }
    check_interior_contact(g)?;
    InteriorSystem::build(g)?.extend(g, boundary_values)
}

/// Full Steklov spectrum of a graph with boundary.
///
/// Eigenvalues ascend, the first is zero to within [`zero_tolerance`], the
/// extensions are harmonic at interior vertices, and each Rayleigh
/// quotient matches its eigenvalue; violations are reported as errors
/// rather than returned silently.
pub fn steklov_spectrum(g: &BoundaryGraph) -> Result<SteklovSpectrum> {
    let dtn = dtn_matrix(g)?;
    let eig = numkit::eigh(&dtn)?;
    let boundary = g.boundary();
    let nb = boundary.len();
    let n = g.n_vertices();

    let system = InteriorSystem::build(g)?;
    let mut extensions = DenseMatrix::zeros(n, nb);
    for j in 0..nb {
        let mode = eig.vectors.col(j);
        let ext = system.extend(g, &mode)?;
        extensions.set_col(j, &ext);
    }

    let sigmas = eig.eigenvalues.clone();
    let tol0 = zero_tolerance(g.max_degree());
    let zero_multiplicity = sigmas.iter().filter(|&&s| s.abs() <= tol0).count();

    // Invariant checks: ascending order, leading zero, harmonicity,
    // Rayleigh consistency.
    for w in sigmas.windows(2) {
        if w[0] > w[1] {
            return Err(SteklovError::InvariantViolated("eigenvalues not ascending".into()));
        }
    }
    if sigmas[0].abs() > tol0 {
        return Err(SteklovError::InvariantViolated(format!(
            "sigma_1 = {:.3e} is not zero within {:.1e}",
            sigmas[0], tol0
        )));
    }
    let lap = g.laplacian();
    let mut harmonic = 0.0f64;
    let mut rayleigh = 0.0f64;
    for j in 0..nb {
        let ext = extensions.col(j);
        let mut lf = vec![0.0; n];
        lap.matvec(&ext, &mut lf);
        for v in 0..n {
            if !g.is_boundary(v) {
                harmonic = harmonic.max(lf[v].abs());
            }
        }
        let q = g
            .dirichlet_energy(&ext)
            .map_err(|e| SteklovError::BadInput(e.to_string()))?;
        // Modes are unit vectors in l^2(B), so q(ext) should equal sigma.
        rayleigh = rayleigh.max((q - sigmas[j]).abs());
    }
    let scale = 1.0 + g.max_degree() as f64;
    if harmonic > 1e-9 * scale {
        return Err(SteklovError::InvariantViolated(format!(
            "interior harmonicity residual {harmonic:.3e} exceeds {:.1e}",
            1e-9 * scale
        )));
    }
    if rayleigh > 1e-8 * scale {
        return Err(SteklovError::InvariantViolated(format!(
            "Rayleigh defect {rayleigh:.3e} exceeds {:.1e}",
            1e-8 * scale
        )));
    }

    Ok(SteklovSpectrum {
        sigmas,
        boundary,
        boundary_modes: eig.vectors,
        extensions,
        zero_multiplicity,
        residuals: SpectrumResiduals {
            eigenpair: eig.max_residual,
            harmonic,
            rayleigh,
        },
    })
}

/// Start-block seed of the sparse partial solver.
const SIGMA_K_SEED: u64 = 0x5e1f_ba5e;

/// Leading part of a Steklov spectrum computed without the dense boundary
/// reduction.
#[derive(Debug, Clone)]
pub struct PartialSpectrum {
    /// The `k` smallest eigenvalues, ascending.
    pub sigmas: Vec<f64>,
    /// Boundary vertex ids (ascending), indexing the trace rows.
    pub boundary: Vec<usize>,
    /// `traces[j]` is mode `j` restricted to the boundary, unit in `l^2(B)`.
    pub traces: Vec<Vec<f64>>,
    /// Worst scaled pencil residual among the returned modes.
    pub max_residual: f64,
    /// Block iterations used.
    pub iterations: usize,
}

/// First `k` Steklov eigenvalues of a graph whose boundary is too large to
/// reduce densely: solves `L u = sigma 1_B u` by a blocked shift-invert
/// iteration on the sparse Laplacian.  Agrees with [`steklov_spectrum`] on
/// the shared eigenvalues; use that instead when the whole spectrum is
/// wanted and the boundary is small.
pub fn steklov_sigma_k(g: &BoundaryGraph, k: usize) -> Result<PartialSpectrum> {
    check_interior_contact(g)?;
    let boundary = g.boundary();
    let nb = boundary.len();
    if k == 0 || k > nb {
        return Err(SteklovError::BadInput(format!(
            "requested {k} of {nb} boundary eigenvalues"
        )));
    }
    let mut mass = vec![0.0f64; g.n_vertices()];
    for &v in &boundary {
        mass[v] = 1.0;
    }
    let modes = numkit::pencil_smallest(&g.laplacian(), &mass, k, SIGMA_K_SEED)?;
    let tol0 = zero_tolerance(g.max_degree());
    if modes.sigmas[0].abs() > tol0 {
        return Err(SteklovError::InvariantViolated(format!(
            "sigma_1 = {:.3e} is not zero within {:.1e}",
            modes.sigmas[0], tol0
        )));
    }
    let bound = sigma_upper_bound(g);
    if let Some(&top) = modes.sigmas.last() {
        if top > bound + 1e-9 * (1.0 + bound) {
            return Err(SteklovError::InvariantViolated(format!(
                "sigma_{k} = {top:.6e} exceeds the degree bound {bound:.6e}"
            )));
        }
    }
    let traces = modes
        .vectors
        .iter()
        .map(|v| boundary.iter().map(|&b| v[b]).collect())
        .collect();
    Ok(PartialSpectrum {
        sigmas: modes.sigmas,
        boundary,
        traces,
        max_residual: modes.max_residual,
        iterations: modes.iterations,
    })
}

/// Maximum order accepted by the brute-force oracle.
pub const BRUTEFORCE_MAX_VERTICES: usize = 12;

/// Independent small-graph oracle for the Steklov spectrum.
///
/// The eigenvalues are the roots of `det(L - sigma * diag(1_B))`.  For
/// `sigma > 0` the number of roots below `sigma` (with multiplicity)
/// equals the negative inertia of `L - sigma * diag(1_B)`, read off a
/// symmetric full-pivoting block factorisation; each eigenvalue is then
/// located by bisection on that count.  No Schur elimination and no
/// eigensolver is involved.
pub fn steklov_bruteforce(g: &BoundaryGraph) -> Result<Vec<f64>> {
    let n = g.n_vertices();
    if n > BRUTEFORCE_MAX_VERTICES {
        return Err(SteklovError::BadInput(format!(
            "oracle accepts at most {BRUTEFORCE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    check_interior_contact(g)?;
    let lap = g.laplacian().to_dense()?;
    let boundary = g.boundary();
    let nb = boundary.len();
    let mut is_b = vec![false; n];
    for &v in &boundary {
        is_b[v] = true;
    }
    let scale = 1.0 + 2.0 * g.max_degree() as f64;

    // Strictly negative eigenvalue count of M(sigma) = L - sigma * diag(1_B).
    let count_below = |sigma: f64| -> usize {
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = lap.get(i, j);
            }
            if is_b[i] {
                m[i * n + i] -= sigma;
            }
        }
        negative_inertia(&mut m, n, 1e-12 * scale)
    };

    // All roots lie strictly below this (sigma_max <= 2 * max degree).
    let mut upper = 2.0 * g.max_degree() as f64 + 1.0;
    let mut found = count_below(upper);
    let mut widenings = 0;
    while found < nb && widenings < 4 {
        upper *= 2.0;
        found = count_below(upper);
        widenings += 1;
    }
    if found != nb {
        return Err(SteklovError::OracleFailed(format!(
            "expected {nb} roots below {upper:.3e}, inertia count found {found}"
        )));
    }

    let mut sigmas = Vec::with_capacity(nb);
    for j in 1..=nb {
        let mut lo = -1e-12 * scale;
        let mut hi = upper;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sigmas.push(0.5 * (lo + hi));
    }
    Ok(sigmas)
}

/// Number of negative eigenvalues of a dense symmetric matrix via
/// Bunch-Parlett elimination (full pivoting, 1x1 and 2x2 blocks).
///
/// A 2x2 pivot is chosen when every diagonal candidate is dominated by the
/// largest off-diagonal entry; such a block always has determinant below
/// `mu0^2 - mu1^2 < 0` and contributes exactly one negative eigenvalue.
/// A remaining block with all entries at or below `zero_floor` counts as
/// zero eigenvalues, which makes the count exact on either side of a root.
fn negative_inertia(m: &mut [f64], n: usize, zero_floor: f64) -> usize {
    const ALPHA: f64 = 0.6403882032022076; // (1 + sqrt(17)) / 8
    let mut neg = 0;
    let mut k = 0;
    while k < n {
        let mut p = k;
        let mut mu0 = 0.0f64;
        for i in k..n {
            let v = m[i * n + i].abs();
            if v > mu0 {
                mu0 = v;
                p = i;
            }
        }
        let mut pq = (k, k);
        let mut mu1 = 0.0f64;
        for i in k..n {
            for j in (i + 1)..n {
                let v = m[i * n + j].abs();
                if v > mu1 {
                    mu1 = v;
                    pq = (i, j);
                }
            }
        }
        if mu0.max(mu1) <= zero_floor {
            break;
        }
        if mu0 >= ALPHA * mu1 {
            swap_sym(m, n, k, p);
            let piv = m[k * n + k];
            if piv < 0.0 {
                neg += 1;
            }
            for i in (k + 1)..n {
                let f = m[i * n + k] / piv;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        m[i * n + j] -= f * m[k * n + j];
                    }
                }
            }
            k += 1;
        } else {
            let (p1, q1) = pq;
            swap_sym(m, n, k, p1);
            let q = if q1 == k { p1 } else { q1 };
            swap_sym(m, n, k + 1, q);
            let a = m[k * n + k];
            let b = m[(k + 1) * n + (k + 1)];
            let c = m[k * n + (k + 1)];
            let det = a * b - c * c;
            neg += 1;
            for i in (k + 2)..n {
                let u = m[i * n + k];
                let v = m[i * n + (k + 1)];
                let x = (b * u - c * v) / det;
                let y = (a * v - c * u) / det;
                if x != 0.0 || y != 0.0 {
                    for j in (k + 2)..n {
                        m[i * n + j] -= x * m[k * n + j] + y * m[(k + 1) * n + j];
                    }
                }
            }
            k += 2;
        }
    }
    neg
}

fn swap_sym(m: &mut [f64], n: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..n {
        m.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        m.swap(i * n + a, i * n + b);
    }
}
