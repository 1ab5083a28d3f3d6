//! Continuum-side spectral tools.
//!
//! This module provides the reference side of the graph-versus-surface
//! comparisons: P1 finite elements for the Steklov problem on the meshes of
//! [`crate::surfaces`], the closed-form Steklov spectrum of a flat cylinder
//! (used as an exactly solvable oracle), collar energy-ratio formulas, and
//! coordinate-stretch perturbations for stability studies.
//!
//! The Steklov problem asks for harmonic functions whose normal derivative
//! on the boundary is proportional to their trace; discretely this is the
//! pencil `K u = sigma M u` with `K` the stiffness matrix and `M` a boundary
//! mass.  Interior nodes carry no mass, so the pencil is solved either by
//! Schur-complementing `K` onto the boundary (dense route) or by the sparse
//! block iteration of [`crate::numkit::pencil_smallest`] when the boundary
//! is large.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::numkit::{
    cholesky_dense, eigh, pencil_smallest, schur_complement, DenseSymMatrix, NumError,
    SparseSymMatrix,
};
use crate::surfaces::{self, complex_to_mesh, FemMesh, PieceComplex, PieceKind, Side, SideRef};

/// Boundary-node count above which the sparse pencil route replaces the
/// dense Schur-complement route.
pub const FEM_DENSE_LIMIT: usize = 1500;

/// Seed for the pencil iteration's deterministic start block.
const PENCIL_SEED: u64 = 0x51ab_c01a;

/// Absolute tolerance for the lowest Steklov eigenvalue, which must be zero
/// on a connected mesh.
const SIGMA1_TOL: f64 = 1e-8;
/// Relative tolerance for Rayleigh-quotient consistency of returned modes.
const RAYLEIGH_TOL: f64 = 1e-7;
/// Hard residual gate on returned modes.
const RESIDUAL_GATE: f64 = 1e-6;

/// Errors from assembly and continuum solvers.
#[derive(Debug, Error)]
pub enum ContinuumError {
    /// Structurally invalid input.
    #[error("invalid input: {0}")]
    BadInput(String),
    /// A mesh triangle with (near-)zero area.
    #[error("triangle {index} is degenerate (area {area:.3e})")]
    DegenerateTriangle { index: usize, area: f64 },
    /// Propagated numerical failure.
    #[error(transparent)]
    Numeric(#[from] NumError),
    /// Propagated mesh failure.
    #[error(transparent)]
    Surface(#[from] surfaces::SurfaceError),
    /// A computed result violated one of the solver's own invariants.
    #[error("solver inconsistency: {0}")]
    Inconsistent(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, ContinuumError>;

/// Flat cylinder `circle x [0, L]`: the cross-section Laplace eigenvalues
/// with multiplicities, ascending, starting at zero.
#[derive(Debug, Clone)]
pub struct CylinderModel {
    pub eigenvalues: Vec<(f64, usize)>,
    pub length: f64,
}

impl CylinderModel {
    /// Circle cross-section of the given circumference: eigenvalues
    /// `(2 pi k / circumference)^2`, double for `k >= 1`, up to `max_k`.
    pub fn circle(circumference: f64, length: f64, max_k: usize) -> Result<Self> {
        if !(circumference > 0.0) || !circumference.is_finite() {
            return Err(ContinuumError::BadInput(format!(
                "circumference {circumference} must be positive"
            )));
        }
        let mut eigenvalues = vec![(0.0, 1)];
        for k in 1..=max_k {
            let w = 2.0 * std::f64::consts::PI * k as f64 / circumference;
            eigenvalues.push((w * w, 2));
        }
        let model = CylinderModel { eigenvalues, length };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(ContinuumError::BadInput(format!(
                "length {} must be positive",
                self.length
            )));
        }
        match self.eigenvalues.first() {
            Some(&(l0, _)) if l0 == 0.0 => {}
            _ => {
                return Err(ContinuumError::BadInput(
                    "cross-section spectrum must start at zero".into(),
                ))
            }
        }
        for pair in self.eigenvalues.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(ContinuumError::BadInput(
                    "cross-section eigenvalues must be strictly ascending".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Result of a finite-element Steklov solve.
#[derive(Debug, Clone)]
pub struct FemSteklovResult {
    /// Ascending eigenvalues; the first is zero (connected mesh).
    pub sigmas: Vec<f64>,
    /// Boundary traces per mode, aligned with `boundary_nodes`.
    pub traces: Vec<Vec<f64>>,
    /// Sorted boundary node ids.
    pub boundary_nodes: Vec<u32>,
    pub n_nodes: usize,
    pub resolution: usize,
    /// Worst scaled eigen-residual among returned modes.
    pub max_residual: f64,
    /// Whether the dense Schur route was taken (false: sparse pencil).
    pub dense_path: bool,
}

fn boundary_node_list(mesh: &FemMesh) -> Vec<u32> {
    let mut nodes: Vec<u32> = mesh.boundary_walks.iter().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// P1 stiffness matrix: each quad cell contributes its two right triangles,
/// integrated exactly.  Symmetric positive semidefinite with the constants
/// in its kernel.
pub fn assemble_stiffness(mesh: &FemMesh) -> Result<SparseSymMatrix> {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut add = |a: u32, b: u32, v: f64| {
        let key = if a <= b {
            (a as usize, b as usize)
        } else {
            (b as usize, a as usize)
        };
        *acc.entry(key).or_insert(0.0) += v;
    };
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let (w, h) = (cell.w, cell.h);
        let area = 0.5 * w * h;
        if !(area.is_finite() && area >= 1e-12) {
            return Err(ContinuumError::DegenerateTriangle { index: 2 * ci, area });
        }
        let [sw, se, ne, nw] = cell.corners;
        let hw = h / (2.0 * w);
        let wh = w / (2.0 * h);
        // Triangle (sw, se, ne): right angle at se.
        add(sw, sw, hw);
        add(se, se, hw + wh);
        add(ne, ne, wh);
        add(sw, se, -hw);
        add(se, ne, -wh);
        // Triangle (sw, ne, nw): right angle at nw.
        add(sw, sw, wh);
        add(ne, ne, hw);
        add(nw, nw, hw + wh);
        add(sw, nw, -wh);
        add(ne, nw, -hw);
    }
    let triplets: Vec<(usize, usize, f64)> =
        acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    Ok(SparseSymMatrix::new(mesh.n_nodes, &triplets)?)
}

/// 1-D boundary mass over the boundary walks.  Lumped by default (each edge
/// of length `len` adds `len/2` to both endpoint diagonals, so the trace is
/// the total boundary length); `consistent` switches to the exact P1 edge
/// mass `[len/3, len/6; len/6, len/3]`.
pub fn assemble_boundary_mass(mesh: &FemMesh, consistent: bool) -> Result<SparseSymMatrix> {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in &mesh.boundary_edges {
        let (i, j) = (
            e.from.min(e.to) as usize,
            e.from.max(e.to) as usize,
        );
        if consistent {
            *acc.entry((i, i)).or_insert(0.0) += e.len / 3.0;
            *acc.entry((j, j)).or_insert(0.0) += e.len / 3.0;
            *acc.entry((i, j)).or_insert(0.0) += e.len / 6.0;
        } else {
            *acc.entry((i, i)).or_insert(0.0) += e.len / 2.0;
            *acc.entry((j, j)).or_insert(0.0) += e.len / 2.0;
        }
    }
    let triplets: Vec<(usize, usize, f64)> =
        acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    Ok(SparseSymMatrix::new(mesh.n_nodes, &triplets)?)
}

/// First `k` Steklov eigenpairs of the mesh.
pub fn fem_steklov(mesh: &FemMesh, k: usize, consistent_mass: bool) -> Result<FemSteklovResult> {
    fem_steklov_with_limit(mesh, k, consistent_mass, FEM_DENSE_LIMIT)
}

pub(crate) fn fem_steklov_with_limit(
    mesh: &FemMesh,
    k: usize,
    consistent_mass: bool,
    dense_limit: usize,
) -> Result<FemSteklovResult> {
    let bnodes = boundary_node_list(mesh);
    let nb = bnodes.len();
    if nb == 0 {
        return Err(ContinuumError::BadInput("mesh has no boundary".into()));
    }
    if k == 0 || k > nb {
        return Err(ContinuumError::BadInput(format!(
            "requested {k} modes of {nb} boundary nodes"
        )));
    }
    let stiff = assemble_stiffness(mesh)?;

    let (sigmas, traces, max_residual, dense_path) = if nb <= dense_limit {
        dense_steklov(mesh, &stiff, &bnodes, k, consistent_mass)?
    } else {
        if consistent_mass {
            return Err(ContinuumError::BadInput(
                "consistent boundary mass is only supported on the dense route".into(),
            ));
        }
        sparse_steklov(mesh, &stiff, &bnodes, k)?
    };

    if sigmas[0].abs() > SIGMA1_TOL {
        return Err(ContinuumError::Inconsistent(format!(
            "lowest eigenvalue {:.3e} is not zero",
            sigmas[0]
        )));
    }
    if max_residual > RESIDUAL_GATE {
        return Err(ContinuumError::Inconsistent(format!(
            "eigen-residual {max_residual:.3e} exceeds {RESIDUAL_GATE:.1e}"
        )));
    }
    Ok(FemSteklovResult {
        sigmas,
        traces,
        boundary_nodes: bnodes,
        n_nodes: mesh.n_nodes,
        resolution: mesh.resolution,
        max_residual,
        dense_path,
    })
}

type SolveOut = (Vec<f64>, Vec<Vec<f64>>, f64, bool);

fn dense_steklov(
    mesh: &FemMesh,
    stiff: &SparseSymMatrix,
    bnodes: &[u32],
    k: usize,
    consistent_mass: bool,
) -> Result<SolveOut> {
    let nb = bnodes.len();
    let keep: Vec<usize> = bnodes.iter().map(|&n| n as usize).collect();
    let s = schur_complement(stiff, &keep)?;
    let pos = |n: u32| bnodes.binary_search(&n).expect("boundary node");

    // Boundary mass restricted to boundary nodes, in `bnodes` order.
    let mut lumped = vec![0.0f64; nb];
    let mut edge_terms: Vec<(usize, usize, f64)> = Vec::new();
    for e in &mesh.boundary_edges {
        let (i, j) = (pos(e.from), pos(e.to));
        lumped[i] += e.len / 2.0;
        lumped[j] += e.len / 2.0;
        edge_terms.push((i.min(j), i.max(j), e.len));
    }

    let (theta, vecs) = if consistent_mass {
        let mut mass = DenseSymMatrix::zeros(nb)?;
        for &(i, j, len) in &edge_terms {
            mass.add_sym(i, i, len / 3.0);
            mass.add_sym(j, j, len / 3.0);
            mass.add_sym(i, j, len / 6.0);
        }
        let chol = cholesky_dense(&mass)?;
        // F = L^{-1} S, one forward sweep per column (= row) of S.
        let mut f_cols: Vec<Vec<f64>> = (0..nb).map(|j| s.row(j).to_vec()).collect();
        for col in f_cols.iter_mut() {
            chol.forward_in_place(col);
        }
        // C = F L^{-T} = (L^{-1} F^T)^T: sweep the rows of F, which then
        // read off as the rows of C.
        let mut c = DenseSymMatrix::zeros(nb)?;
        let mut tmp = vec![0.0; nb];
        for i in 0..nb {
            for (j, col) in f_cols.iter().enumerate() {
                tmp[j] = col[i];
            }
            chol.forward_in_place(&mut tmp);
            for j in 0..=i {
                c.set_sym(i, j, tmp[j]);
            }
        }
        let eig = eigh(&c)?;
        let mut vecs = Vec::with_capacity(k);
        for m in 0..k {
            let mut v: Vec<f64> = (0..nb).map(|i| eig.vectors.get(i, m)).collect();
            chol.backward_in_place(&mut v);
            vecs.push(v);
        }
        (eig.eigenvalues[..k].to_vec(), vecs)
    } else {
        let d: Vec<f64> = lumped.iter().map(|&m| 1.0 / m.sqrt()).collect();
        let c = DenseSymMatrix::from_fn(nb, |i, j| s.get(i, j) * d[i] * d[j])?;
        let eig = eigh(&c)?;
        let mut vecs = Vec::with_capacity(k);
        for m in 0..k {
            vecs.push((0..nb).map(|i| d[i] * eig.vectors.get(i, m)).collect());
        }
        (eig.eigenvalues[..k].to_vec(), vecs)
    };

    // Residuals and Rayleigh consistency on the boundary forms.
    let scale = 1.0 + s.norm_inf();
    let mut max_res = 0.0f64;
    let mut su = vec![0.0; nb];
    for (m, u) in vecs.iter().enumerate() {
        s.matvec(u, &mut su);
        let mut mu = vec![0.0; nb];
        if consistent_mass {
            for &(i, j, len) in &edge_terms {
                mu[i] += len / 3.0 * u[i] + len / 6.0 * u[j];
                mu[j] += len / 3.0 * u[j] + len / 6.0 * u[i];
            }
        } else {
            for i in 0..nb {
                mu[i] = lumped[i] * u[i];
            }
        }
        let num: f64 = u.iter().zip(&su).map(|(a, b)| a * b).sum();
        let den: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let rayleigh = num / den;
        if (rayleigh - theta[m]).abs() > RAYLEIGH_TOL * (1.0 + theta[m].abs()) {
            return Err(ContinuumError::Inconsistent(format!(
                "mode {m}: Rayleigh quotient {rayleigh:.12e} vs eigenvalue {:.12e}",
                theta[m]
            )));
        }
        let mut r2 = 0.0;
        let mut u2 = 0.0;
        for i in 0..nb {
            let r = su[i] - theta[m] * mu[i];
            r2 += r * r;
            u2 += u[i] * u[i];
        }
        max_res = max_res.max(r2.sqrt() / (scale * u2.sqrt()));
    }
    Ok((theta, vecs, max_res, true))
}

fn sparse_steklov(
    mesh: &FemMesh,
    stiff: &SparseSymMatrix,
    bnodes: &[u32],
    k: usize,
) -> Result<SolveOut> {
    let mut m_diag = vec![0.0f64; mesh.n_nodes];
    for e in &mesh.boundary_edges {
        m_diag[e.from as usize] += e.len / 2.0;
        m_diag[e.to as usize] += e.len / 2.0;
    }
    let modes = pencil_smallest(stiff, &m_diag, k, PENCIL_SEED)?;
    let traces: Vec<Vec<f64>> = modes
        .vectors
        .iter()
        .map(|v| bnodes.iter().map(|&n| v[n as usize]).collect())
        .collect();
    Ok((modes.sigmas, traces, modes.max_residual, false))
}

/// Closed-form Steklov spectrum of the cylinder: for each cross-section
/// eigenvalue the 1-D reduction on `[0, L]` with the Steklov condition at
/// both ends gives two eigenvalues — `{0, 2/L}` for the zero mode and
/// `{x tanh(xL/2), x coth(xL/2)}` with `x = sqrt(lambda)` otherwise.
pub fn cylinder_steklov_analytic(model: &CylinderModel, count: usize) -> Result<Vec<f64>> {
    model.validate()?;
    let l = model.length;
    let mut sig: Vec<f64> = Vec::new();
    for &(lam, mult) in &model.eigenvalues {
        let (lo, hi) = if lam == 0.0 {
            (0.0, 2.0 / l)
        } else {
            let x = lam.sqrt();
            let t = (x * l / 2.0).tanh();
            (x * t, x / t)
        };
        for _ in 0..mult {
            sig.push(lo);
            sig.push(hi);
        }
    }
    sig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sig.len() < count {
        return Err(ContinuumError::BadInput(format!(
            "model provides {} modes, {count} requested; raise max_k",
            sig.len()
        )));
    }
    sig.truncate(count);
    // Re-verify every value against the two-point boundary condition.
    for &s in &sig {
        let worst = model
            .eigenvalues
            .iter()
            .map(|&(lam, _)| cylinder_mode_residual(lam, l, s))
            .fold(f64::INFINITY, f64::min);
        if worst > 1e-10 {
            return Err(ContinuumError::Inconsistent(format!(
                "sigma {s:.12e} fails the end condition (residual {worst:.3e})"
            )));
        }
    }
    Ok(sig)
}

/// Shooting residual of the 1-D mode problem: integrate `a'' = lambda a`
/// from `a(0) = 1, a'(0) = -sigma` and report the defect of the Steklov
/// condition at the far end, scale-normalized.
pub fn cylinder_mode_residual(lambda: f64, l: f64, sigma: f64) -> f64 {
    if lambda == 0.0 {
        let a = 1.0 - sigma * l;
        let da = -sigma;
        (da - sigma * a).abs() / (1.0 + sigma * sigma)
    } else {
        let x = lambda.sqrt();
        let (ch, sh) = ((x * l).cosh(), (x * l).sinh());
        let a = ch - sigma / x * sh;
        let da = x * sh - sigma * ch;
        (da - sigma * a).abs() / (ch * (1.0 + sigma) * (1.0 + x))
    }
}

/// Ratio of tangential boundary energy to total collar energy for a single
/// cross-section mode on a depth-1 collar: the extension is
/// `a(r) f(theta)` with `a(r) = cosh(xr) - (sigma/x) sinh(xr)`, and the
/// ratio evaluates in closed form to
/// `1 / [(1 + sigma^2/x^2) sinh(2x)/(2x) - (sigma/x^2)(cosh(2x) - 1)]`.
/// Zero modes have no tangential energy; the ratio is 0.
pub fn collar_energy_ratio(lambda: f64, sigma: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let x = lambda.sqrt();
    let bracket = (1.0 + sigma * sigma / lambda) * (2.0 * x).sinh() / (2.0 * x)
        - sigma / lambda * ((2.0 * x).cosh() - 1.0);
    1.0 / bracket
}

/// The same ratio for a combination `F = sum c_k a_k(r) f_k(theta)` of
/// modes: cross terms vanish by orthogonality, so both energies are sums of
/// per-mode terms.
pub fn collar_energy_ratio_combination(lambdas: &[f64], sigmas: &[f64], coeffs: &[f64]) -> f64 {
    assert_eq!(lambdas.len(), sigmas.len());
    assert_eq!(lambdas.len(), coeffs.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&lam, &sig), &c) in lambdas.iter().zip(sigmas).zip(coeffs) {
        let c2 = c * c;
        if lam > 0.0 {
            num += c2 * lam;
            den += c2 * lam / collar_energy_ratio(lam, sig);
        } else {
            den += c2 * sig * sig;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Per-mode energy ratio looked up from a cylinder model.
pub fn energy_ratio_check(model: &CylinderModel, mode: usize, sigma: f64) -> Result<f64> {
    model.validate()?;
    let &(lam, _) = model
        .eigenvalues
        .get(mode)
        .ok_or_else(|| ContinuumError::BadInput(format!("no cross-section mode {mode}")))?;
    Ok(collar_energy_ratio(lam, sigma))
}

/// Stretches the mesh geometry by `a` along one chart axis (0 = widths,
/// 1 = heights).  Identifications are untouched; boundary edge lengths are
/// re-derived from the cells.  Intended for single-chart periodic meshes
/// (cylinders), where every identified edge pair is axis-aligned the same
/// way.
pub fn quasi_isometry_perturb(mesh: &FemMesh, a: f64, axis: usize) -> Result<FemMesh> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ContinuumError::BadInput(format!(
            "stretch factor {a} must be positive"
        )));
    }
    if axis > 1 {
        return Err(ContinuumError::BadInput(format!("axis {axis} out of range")));
    }
    let mut out = mesh.clone();
    for cell in out.cells.iter_mut() {
        if axis == 0 {
            cell.w *= a;
        } else {
            cell.h *= a;
        }
    }
    for c in out.coords.iter_mut() {
        c[axis] *= a;
    }
    let (edges, walks) = surfaces::trace_boundary(&out.cells)?;
    debug_assert_eq!(walks.len(), mesh.boundary_walks.len());
    out.boundary_edges = edges;
    out.boundary_walks = walks;
    Ok(out)
}

/// Uniform dilation: both axes by `s`.  Steklov eigenvalues scale exactly
/// by `1/s`.
pub fn dilate_mesh(mesh: &FemMesh, s: f64) -> Result<FemMesh> {
    let once = quasi_isometry_perturb(mesh, s, 0)?;
    quasi_isometry_perturb(&once, s, 1)
}

/// Flat cylinder of circumference 1 and height 1: a unit square with its
/// east and west sides identified, meshed at `m` subdivisions.  The two
/// boundary circles are the top and bottom sides.
pub fn cylinder_mesh(m: usize) -> Result<FemMesh> {
    let mut c = PieceComplex::default();
    c.pieces.push(PieceKind::Planar(0));
    let s = c.add_square(0, [0.0, 0.0]);
    c.glue(SideRef::new(s, Side::E), SideRef::new(s, Side::W));
    Ok(complex_to_mesh(&c, m)?)
}

/// Upper bound `8 pi (genus + 1)` for the scale-invariant product
/// `sigma_2 * boundary length` on a compact orientable surface.
pub fn sigma2_length_bound(genus: usize) -> f64 {
    8.0 * std::f64::consts::PI * (genus as f64 + 1.0)
}
