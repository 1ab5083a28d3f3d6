//! Finite graphs with a distinguished boundary vertex set, their Laplacian
//! and energy forms, and deterministic generator families.
//!
//! | op                      | summary                                            |
//! |-------------------------|----------------------------------------------------|
//! | [`BoundaryGraph::new`]  | validated construction with canonical ordering     |
//! | [`BoundaryGraph::laplacian`] | sparse combinatorial Laplacian                |
//! | [`BoundaryGraph::dirichlet_energy`] | sum of squared edge differences        |
//! | [`BoundaryGraph::boundary_energy`] | same sum restricted to boundary edges   |
//! | [`BoundaryGraph::hop_distance_matrix`] | all-pairs shortest hop counts       |
//! | [`lattice_graph`]       | square lattice `{0..l}^2`, boundary everything     |
//! | [`random_regular_graph`]| seeded simple connected d-regular graph            |
//! | [`laplacian_lambda2`]   | spectral gap with zero-eigenvalue multiplicity     |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{self, DenseSymMatrix, NumError, SparseSymMatrix};

/// Errors from graph construction and graph operations.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    BadInput(String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("boundary set is empty")]
    EmptyBoundary,
    #[error("vertex function has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("random regular generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },
    #[error("graph JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Result alias for the graph layer.
pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
    boundary: Vec<usize>,
}

/// A finite simple graph together with a non-empty boundary vertex set.
///
/// Edges are held canonically: each pair stored as `(min, max)` and the
/// list sorted lexicographically; the boundary is sorted ascending.  Two
/// graphs constructed from the same data in any input order compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    boundary: Vec<u32>,
    adj: Vec<Vec<u32>>,
    is_boundary: Vec<bool>,
}

impl BoundaryGraph {
    /// Validated constructor. Rejects self-loops, duplicate edges (in
    /// either orientation), duplicate or out-of-range boundary vertices,
    /// and empty boundaries.
    pub fn new(n: usize, edges: &[(usize, usize)], boundary: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(GraphError::BadInput("graph needs at least one vertex".into()));
        }
        let mut canon: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u >= n {
                return Err(GraphError::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(GraphError::IndexOutOfRange { index: v, n });
            }
            let (a, b) = (u.min(v) as u32, u.max(v) as u32);
            canon.push((a, b));
        }
        canon.sort_unstable();
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0 as usize, w[0].1 as usize));
            }
        }
        if boundary.is_empty() {
            return Err(GraphError::EmptyBoundary);
        }
        let mut bnd: Vec<u32> = Vec::with_capacity(boundary.len());
        for &v in boundary {
            if v >= n {
                return Err(GraphError::IndexOutOfRange { index: v, n });
            }
            bnd.push(v as u32);
        }
        bnd.sort_unstable();
        for w in bnd.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::BadInput(format!(
                    "duplicate boundary vertex {}",
                    w[0]
                )));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &canon {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let mut is_boundary = vec![false; n];
        for &v in &bnd {
            is_boundary[v as usize] = true;
        }
        Ok(Self { n, edges: canon, boundary: bnd, adj, is_boundary })
    }

    /// Number of vertices.
    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Canonically ordered edge list.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    /// Number of edges.
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Ascending boundary vertex list.
    pub fn boundary(&self) -> Vec<usize> {
        self.boundary.iter().map(|&v| v as usize).collect()
    }

    /// Boundary size `|B|`.
    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    /// Whether `v` is a boundary vertex.
    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&u| u as usize)
    }

    /// Degree of `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Maximum degree over all vertices.
    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Combinatorial Laplacian `L = D - A` as a sparse symmetric matrix.
    /// Row sums are exactly zero; a diagonal entry is stored for every
    /// vertex (explicit zero for isolated ones).
    pub fn laplacian(&self) -> SparseSymMatrix {
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(self.n + self.edges.len());
        for v in 0..self.n {
            t.push((v, v, self.degree(v) as f64));
        }
        for &(a, b) in &self.edges {
            t.push((a as usize, b as usize, -1.0));
        }
        SparseSymMatrix::new(self.n, &t).expect("validated graph data")
    }

    /// Dirichlet energy `sum_{u ~ v} (f(u) - f(v))^2`.
    pub fn dirichlet_energy(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, got: f.len() });
        }
        let mut q = 0.0;
        for &(a, b) in &self.edges {
            let d = f[a as usize] - f[b as usize];
            q += d * d;
        }
        Ok(q)
    }

    /// Dirichlet energy restricted to edges with both endpoints in the
    /// boundary.  Always at most [`Self::dirichlet_energy`].
    pub fn boundary_energy(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, got: f.len() });
        }
        let mut q = 0.0;
        for &(a, b) in &self.edges {
            if self.is_boundary[a as usize] && self.is_boundary[b as usize] {
                let d = f[a as usize] - f[b as usize];
                q += d * d;
            }
        }
        Ok(q)
    }

    /// Squared boundary norm `sum_{v in B} f(v)^2`.
    pub fn boundary_norm_sq(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, got: f.len() });
        }
        Ok(self.boundary.iter().map(|&v| f[v as usize] * f[v as usize]).sum())
    }

    /// All-pairs hop distances by BFS from every vertex.
    pub fn hop_distance_matrix(&self) -> HopMatrix {
        let mut d = vec![HopMatrix::UNREACHABLE; self.n * self.n];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..self.n {
            let row = &mut d[s * self.n..(s + 1) * self.n];
            row[s] = 0;
            queue.clear();
            queue.push_back(s as u32);
            while let Some(u) = queue.pop_front() {
                let du = row[u as usize];
                for &v in &self.adj[u as usize] {
                    if row[v as usize] == HopMatrix::UNREACHABLE {
                        row[v as usize] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        HopMatrix { n: self.n, d }
    }

    /// Connected component label per vertex plus component count; labels
    /// are assigned in order of the smallest vertex of each component.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if label[v as usize] == usize::MAX {
                        label[v as usize] = count;
                        stack.push(v as usize);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Whether the graph is connected.
    pub fn is_connected(&self) -> bool {
        self.components().1 == 1
    }

    /// Canonical JSON: `{"n": ..., "edges": [[i, j], ...], "boundary": [...]}`
    /// with edges sorted lexicographically and the boundary ascending.
    /// Round-trips bit-exactly through [`BoundaryGraph::from_json`].
    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a as usize, b as usize]).collect(),
            boundary: self.boundary(),
        };
        serde_json::to_string(&doc).expect("graph serialization cannot fail")
    }

    /// Parses and validates graph JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|&[a, b]| (a, b)).collect();
        Self::new(doc.n, &edges, &doc.boundary)
    }
}

/// Symmetric hop-distance matrix with an explicit unreachable sentinel
/// (never a float infinity).
#[derive(Debug, Clone)]
pub struct HopMatrix {
    n: usize,
    d: Vec<u32>,
}

impl HopMatrix {
    /// Sentinel for disconnected pairs.
    pub const UNREACHABLE: u32 = u32::MAX;

    /// Matrix order.
    pub fn order(&self) -> usize {
        self.n
    }

    /// Distance, or `None` when no path exists.
    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let v = self.d[i * self.n + j];
        (v != Self::UNREACHABLE).then_some(v)
    }

    /// Raw entry including the sentinel value.
    pub fn raw(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    /// Largest finite entry (graph diameter when connected).
    pub fn max_finite(&self) -> u32 {
        self.d.iter().copied().filter(|&v| v != Self::UNREACHABLE).max().unwrap_or(0)
    }
}

/// Square lattice `{0, ..., l} x {0, ..., l}` with 4-neighbour adjacency
/// and every vertex in the boundary.  Vertex `(a, b)` has index
/// `a * (l + 1) + b`.
pub fn lattice_graph(l: usize) -> BoundaryGraph {
    assert!(l >= 1, "lattice side must be positive");
    let side = l + 1;
    let n = side * side;
    let idx = |a: usize, b: usize| a * side + b;
    let mut edges = Vec::with_capacity(2 * l * side);
    for a in 0..side {
        for b in 0..side {
            if a + 1 < side {
                edges.push((idx(a, b), idx(a + 1, b)));
            }
            if b + 1 < side {
                edges.push((idx(a, b), idx(a, b + 1)));
            }
        }
    }
    let boundary: Vec<usize> = (0..n).collect();
    BoundaryGraph::new(n, &edges, &boundary).expect("lattice construction is valid")
}

/// Path on `n` vertices `0 - 1 - ... - n-1` with the given boundary.
pub fn path_graph(n: usize, boundary: &[usize]) -> Result<BoundaryGraph> {
    let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    BoundaryGraph::new(n, &edges, boundary)
}

/// Cycle on `n >= 3` vertices with the given boundary.
pub fn cycle_graph(n: usize, boundary: &[usize]) -> Result<BoundaryGraph> {
    if n < 3 {
        return Err(GraphError::BadInput("cycle needs at least 3 vertices".into()));
    }
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n - 1));
    BoundaryGraph::new(n, &edges, boundary)
}

/// Star with hub `0` and `leaves` leaf vertices `1..=leaves`, with the
/// given boundary.
pub fn star_graph(leaves: usize, boundary: &[usize]) -> Result<BoundaryGraph> {
    if leaves == 0 {
        return Err(GraphError::BadInput("star needs at least one leaf".into()));
    }
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|v| (0, v)).collect();
    BoundaryGraph::new(leaves + 1, &edges, boundary)
}

/// Seeded simple connected `d`-regular graph on `n` vertices by the
/// pairing model: `n * d` half-edges are shuffled and matched, and the
/// outcome is rejected wholesale unless it is simple and connected.
/// Deterministic for a fixed `(n, d, seed)`.  Boundary = all vertices.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<BoundaryGraph> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if n == 0 || d == 0 {
        return Err(GraphError::BadInput("need n > 0 and d > 0".into()));
    }
    if n * d % 2 != 0 {
        return Err(GraphError::BadInput(format!("n*d = {} must be even", n * d)));
    }
    if d >= n {
        return Err(GraphError::BadInput(format!("degree {d} needs more than {n} vertices")));
    }
    const MAX_ATTEMPTS: usize = 10_000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let boundary: Vec<usize> = (0..n).collect();
    let mut stubs: Vec<usize> = (0..n * d).map(|s| s / d).collect();
    for _attempt in 0..MAX_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * d / 2);
        let mut ok = true;
        let mut seen = std::collections::HashSet::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v {
                ok = false;
                break;
            }
            if !seen.insert((u.min(v), u.max(v))) {
                ok = false;
                break;
            }
            edges.push((u, v));
        }
        if !ok {
            continue;
        }
        let g = BoundaryGraph::new(n, &edges, &boundary)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationFailed { attempts: MAX_ATTEMPTS })
}

/// A named generator family with its parameters; gives experiment configs
/// a serialisable handle on graph construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamilySpec {
    /// `lattice_graph(l)`.
    Lattice { l: usize },
    /// `random_regular_graph(n, d, seed)`.
    RandomRegular { n: usize, d: usize, seed: u64 },
    /// Path with boundary = both endpoints.
    Path { n: usize },
    /// Cycle with boundary = all vertices.
    Cycle { n: usize },
    /// Star with boundary = the leaves.
    Star { leaves: usize },
}

impl GraphFamilySpec {
    /// Builds the graph this spec names.
    pub fn build(&self) -> Result<BoundaryGraph> {
        match *self {
            GraphFamilySpec::Lattice { l } => {
                if l == 0 {
                    return Err(GraphError::BadInput("lattice needs l >= 1".into()));
                }
                Ok(lattice_graph(l))
            }
            GraphFamilySpec::RandomRegular { n, d, seed } => random_regular_graph(n, d, seed),
            GraphFamilySpec::Path { n } => {
                if n < 2 {
                    return Err(GraphError::BadInput("path needs n >= 2".into()));
                }
                path_graph(n, &[0, n - 1])
            }
            GraphFamilySpec::Cycle { n } => {
                let all: Vec<usize> = (0..n).collect();
                cycle_graph(n, &all)
            }
            GraphFamilySpec::Star { leaves } => {
                let b: Vec<usize> = (1..=leaves).collect();
                star_graph(leaves, &b)
            }
        }
    }
}

/// Spectral gap report from [`laplacian_lambda2`].
#[derive(Debug, Clone, Copy)]
pub struct Lambda2Result {
    /// Second-smallest Laplacian eigenvalue (0 when disconnected).
    pub lambda2: f64,
    /// Multiplicity of the zero eigenvalue = number of connected
    /// components (computed combinatorially, so it is exact).
    pub zero_multiplicity: usize,
}

/// Order below which the gap is read off a full dense eigendecomposition;
/// above, deflated subspace iteration with a projected CG inner solve.
const LAMBDA2_DENSE_LIMIT: usize = 400;

/// Second-smallest eigenvalue of the graph Laplacian.
///
/// Disconnected graphs report `lambda2 = 0` with the zero-eigenvalue
/// multiplicity equal to the component count.
pub fn laplacian_lambda2(g: &BoundaryGraph) -> Result<Lambda2Result> {
    let n = g.n_vertices();
    if n < 2 {
        return Err(GraphError::BadInput("lambda2 needs at least two vertices".into()));
    }
    let (_, comps) = g.components();
    if comps > 1 {
        return Ok(Lambda2Result { lambda2: 0.0, zero_multiplicity: comps });
    }
    let lap = g.laplacian();
    let lambda2 = if n <= LAMBDA2_DENSE_LIMIT {
        let eig = numkit::eigh(&lap.to_dense()?)?;
        eig.eigenvalues[1]
    } else {
        subspace_gap(&lap, g.max_degree())?
    };
    Ok(Lambda2Result { lambda2: lambda2.max(0.0), zero_multiplicity: 1 })
}

/// Smallest nonzero Laplacian eigenvalue of a connected graph by block
/// inverse iteration on the mean-zero subspace.
fn subspace_gap(lap: &SparseSymMatrix, max_degree: usize) -> Result<f64> {
    let n = lap.order();
    let dim = 4.min(n - 1);
    let scale = 1.0 + 2.0 * max_degree as f64;
    let tol = 1e-10 * scale;

    // Deterministic start block: a fixed integer hash per entry, centred.
    // The mix must be nonlinear in (i, j) — an affine hash makes the
    // columns differ by a constant, which the mean projection removes.
    let mut basis: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let mut h = (i as u64) ^ ((j as u64) << 32) ^ 0x9e37_79b9_7f4a_7c15;
                    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                    h ^= h >> 31;
                    (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        })
        .collect();
    for v in basis.iter_mut() {
        project_out_constant(v);
    }
    orthonormalize(&mut basis);

    let mut ritz = f64::INFINITY;
    for _outer in 0..200 {
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for x in &basis {
            next.push(projected_cg(lap, x)?);
        }
        orthonormalize(&mut next);
        // Rayleigh-Ritz on the block.
        let mut ly: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for y in &next {
            let mut out = vec![0.0; n];
            lap.matvec(y, &mut out);
            ly.push(out);
        }
        let m = DenseSymMatrix::from_fn(dim, |a, b| dot(&next[a], &ly[b]))?;
        let small = numkit::eigh(&m)?;
        // Rotate the block onto the Ritz vectors (ascending).
        let mut rotated: Vec<Vec<f64>> = vec![vec![0.0; n]; dim];
        for (col, r) in rotated.iter_mut().enumerate() {
            for a in 0..dim {
                let w = small.vectors.get(a, col);
                for i in 0..n {
                    r[i] += w * next[a][i];
                }
            }
        }
        basis = rotated;
        ritz = small.eigenvalues[0];
        // Residual of the leading Ritz pair decides convergence.
        let mut lx = vec![0.0; n];
        lap.matvec(&basis[0], &mut lx);
        let res: f64 = (0..n).map(|i| (lx[i] - ritz * basis[0][i]).powi(2)).sum::<f64>().sqrt();
        if res <= tol {
            return Ok(ritz);
        }
    }
    Err(GraphError::Num(NumError::NotConverged {
        what: "subspace iteration for the spectral gap",
        iterations: 200,
        residual: ritz,
    }))
}

fn project_out_constant(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn orthonormalize(block: &mut [Vec<f64>]) {
    let dim = block.len();
    for j in 0..dim {
        for k in 0..j {
            let proj = dot(&block[j], &block[k]);
            let prev = block[k].clone();
            for (x, p) in block[j].iter_mut().zip(&prev) {
                *x -= proj * p;
            }
        }
        let norm = dot(&block[j], &block[j]).sqrt();
        assert!(norm > 1e-300, "degenerate block in subspace iteration");
        for x in block[j].iter_mut() {
            *x /= norm;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// CG for `L y = x` on the mean-zero subspace of a connected graph
/// Laplacian (where `L` is positive definite).
fn projected_cg(lap: &SparseSymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = lap.order();
    let diag = lap.diag();
    let mut rhs = b.to_vec();
    project_out_constant(&mut rhs);
    let b_norm = dot(&rhs, &rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = 1e-12 * b_norm;
    let mut x = vec![0.0; n];
    let mut r = rhs;
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    project_out_constant(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let cap = 40 * n;
    for _ in 0..cap {
        if dot(&r, &r).sqrt() <= target {
            return Ok(x);
        }
        lap.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(GraphError::Num(NumError::NotPositiveDefinite {
                context: "projected conjugate gradients",
                index: 0,
                pivot: pap,
            }));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        project_out_constant(&mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= target {
        return Ok(x);
    }
    Err(GraphError::Num(NumError::NotConverged {
        what: "projected conjugate gradients",
        iterations: cap,
        residual: dot(&r, &r).sqrt() / b_norm,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_path() -> BoundaryGraph {
        path_graph(2, &[0, 1]).unwrap()
    }

    #[test]
    fn construction_canonicalizes() {
        let a = BoundaryGraph::new(4, &[(2, 1), (0, 3), (1, 0)], &[3, 0]).unwrap();
        let b = BoundaryGraph::new(4, &[(0, 1), (1, 2), (3, 0)], &[0, 3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (1, 2)]);
        assert_eq!(a.boundary(), vec![0, 3]);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            BoundaryGraph::new(3, &[(1, 1)], &[0]),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            BoundaryGraph::new(3, &[(0, 1), (1, 0)], &[0]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            BoundaryGraph::new(3, &[(0, 3)], &[0]),
            Err(GraphError::IndexOutOfRange { index: 3, n: 3 })
        ));
        assert!(matches!(
            BoundaryGraph::new(3, &[(0, 1)], &[]),
            Err(GraphError::EmptyBoundary)
        ));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let g = BoundaryGraph::new(5, &[(4, 0), (1, 2), (2, 3)], &[2, 0]).unwrap();
        let s = g.to_json();
        let g2 = BoundaryGraph::from_json(&s).unwrap();
        assert_eq!(g, g2);
        assert_eq!(g2.to_json(), s);
        assert_eq!(s, r#"{"n":5,"edges":[[0,4],[1,2],[2,3]],"boundary":[0,2]}"#);
    }

    #[test]
    fn laplacian_hand_values() {
        let g = two_path();
        let l = g.laplacian().to_dense().unwrap();
        assert_eq!(l.get(0, 0), 1.0);
        assert_eq!(l.get(0, 1), -1.0);
        assert_eq!(l.get(1, 1), 1.0);

        let tri = cycle_graph(3, &[0]).unwrap();
        let lt = tri.laplacian().to_dense().unwrap();
        for i in 0..3 {
            assert_eq!(lt.get(i, i), 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(lt.get(i, j), -1.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_row_sums_vanish() {
        let g = lattice_graph(3);
        let l = g.laplacian();
        let ones = vec![1.0; g.n_vertices()];
        let mut out = vec![0.0; g.n_vertices()];
        l.matvec(&ones, &mut out);
        assert!(out.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn energy_hand_values() {
        let g = two_path();
        assert_eq!(g.dirichlet_energy(&[5.0, 5.0]).unwrap(), 0.0);
        assert_eq!(g.dirichlet_energy(&[0.0, 1.0]).unwrap(), 1.0);
        let p3 = path_graph(3, &[0, 2]).unwrap();
        assert_eq!(p3.dirichlet_energy(&[0.0, 1.0, 3.0]).unwrap(), 5.0);
        // Non-adjacent boundary: restricted energy is identically zero.
        assert_eq!(p3.boundary_energy(&[2.0, -7.0, 11.0]).unwrap(), 0.0);
        // Two adjacent boundary vertices on a 4-cycle, indicator function.
        let c4 = cycle_graph(4, &[0, 1]).unwrap();
        assert_eq!(c4.boundary_energy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        // Full boundary: restriction drops nothing.
        let full = cycle_graph(4, &[0, 1, 2, 3]).unwrap();
        let f = [0.3, -1.2, 2.0, 0.7];
        assert_eq!(full.boundary_energy(&f).unwrap(), full.dirichlet_energy(&f).unwrap());
    }

    #[test]
    fn energy_length_mismatch() {
        assert!(matches!(
            two_path().dirichlet_energy(&[1.0]),
            Err(GraphError::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn hop_distances() {
        assert_eq!(two_path().hop_distance_matrix().get(0, 1), Some(1));
        let c5 = cycle_graph(5, &[0]).unwrap();
        assert_eq!(c5.hop_distance_matrix().max_finite(), 2);
        // Two disjoint edges: cross pairs unreachable.
        let g = BoundaryGraph::new(4, &[(0, 1), (2, 3)], &[0]).unwrap();
        let h = g.hop_distance_matrix();
        assert_eq!(h.get(0, 2), None);
        assert_eq!(h.raw(0, 3), HopMatrix::UNREACHABLE);
        assert_eq!(h.get(2, 3), Some(1));
    }

    #[test]
    fn lattice_shape() {
        let g1 = lattice_graph(1);
        assert_eq!(g1.n_vertices(), 4);
        assert_eq!(g1.n_edges(), 4);
        assert!(g1.edges().all(|(u, v)| u != v));
        assert!((0..4).all(|v| g1.degree(v) == 2));

        let g2 = lattice_graph(2);
        assert_eq!(g2.n_vertices(), 9);
        assert_eq!(g2.n_edges(), 12);
        assert_eq!(g2.boundary().len(), 9);

        let g5 = lattice_graph(5);
        assert!((0..g5.n_vertices()).all(|v| matches!(g5.degree(v), 2 | 3 | 4)));
    }

    #[test]
    fn random_regular_is_deterministic_and_regular() {
        let a = random_regular_graph(20, 4, 7).unwrap();
        let b = random_regular_graph(20, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!((0..20).all(|v| a.degree(v) == 4));
        assert!(a.is_connected());
    }

    #[test]
    fn random_regular_on_five_vertices_is_complete() {
        for seed in [0u64, 1, 7, 100] {
            let g = random_regular_graph(5, 4, seed).unwrap();
            assert_eq!(g.n_edges(), 10, "K5 is the only simple 4-regular graph on 5 vertices");
        }
    }

    #[test]
    fn random_regular_rejects_odd_total_degree() {
        assert!(random_regular_graph(5, 3, 1).is_err());
    }

    #[test]
    fn lambda2_hand_values() {
        let r = laplacian_lambda2(&two_path()).unwrap();
        assert!((r.lambda2 - 2.0).abs() < 1e-12);
        assert_eq!(r.zero_multiplicity, 1);

        let c4 = cycle_graph(4, &[0]).unwrap();
        let r = laplacian_lambda2(&c4).unwrap();
        assert!((r.lambda2 - 2.0).abs() < 1e-12);

        let l4 = lattice_graph(4);
        let r = laplacian_lambda2(&l4).unwrap();
        let want = 4.0 * (std::f64::consts::PI / 10.0).sin().powi(2);
        assert!((r.lambda2 - want).abs() < 1e-9, "got {}, want {want}", r.lambda2);
    }

    #[test]
    fn lambda2_disconnected_reports_multiplicity() {
        let g = BoundaryGraph::new(4, &[(0, 1), (2, 3)], &[0]).unwrap();
        let r = laplacian_lambda2(&g).unwrap();
        assert_eq!(r.lambda2, 0.0);
        assert_eq!(r.zero_multiplicity, 2);
    }

    #[test]
    fn lambda2_iterative_path_matches_closed_form() {
        // Path on n vertices: lambda2 = 4 sin^2(pi / (2n)).
        let n = 600;
        let g = path_graph(n, &[0, n - 1]).unwrap();
        let r = laplacian_lambda2(&g).unwrap();
        let want = 4.0 * (std::f64::consts::PI / (2.0 * n as f64)).sin().powi(2);
        assert!(
            (r.lambda2 - want).abs() < 1e-9 * (1.0 + want),
            "got {}, want {want}",
            r.lambda2
        );
    }

    #[test]
    fn lambda2_iterative_lattice_matches_closed_form() {
        // Grid of (l+1)^2 vertices: lambda2 = 4 sin^2(pi / (2(l+1))),
        // inherited from the path factor.  l = 20 crosses the dense
        // limit, and its start block once collapsed to rank one under
        // the mean projection (an affine hash differs by a constant
        // between columns), so keep this above LAMBDA2_DENSE_LIMIT.
        let l = 20;
        let g = lattice_graph(l);
        assert!(g.n_vertices() > LAMBDA2_DENSE_LIMIT);
        let r = laplacian_lambda2(&g).unwrap();
        let want = 4.0 * (std::f64::consts::PI / (2.0 * (l + 1) as f64)).sin().powi(2);
        assert!(
            (r.lambda2 - want).abs() < 1e-9 * (1.0 + want),
            "got {}, want {want}",
            r.lambda2
        );
    }

    #[test]
    fn lambda2_connected_random_regular_is_positive() {
        let g = random_regular_graph(50, 4, 3).unwrap();
        let r = laplacian_lambda2(&g).unwrap();
        assert!(r.lambda2 > 1e-6);
        assert_eq!(r.zero_multiplicity, 1);
    }

    #[test]
    fn family_spec_builds() {
        assert_eq!(GraphFamilySpec::Lattice { l: 2 }.build().unwrap().n_vertices(), 9);
        let p = GraphFamilySpec::Path { n: 5 }.build().unwrap();
        assert_eq!(p.boundary(), vec![0, 4]);
        let s = GraphFamilySpec::Star { leaves: 3 }.build().unwrap();
        assert_eq!(s.boundary(), vec![1, 2, 3]);
    }

    /// Strategy: a connected graph assembled from a random spanning tree
    /// plus extra edges, with a random non-empty boundary.
    fn connected_graph_strategy() -> impl Strategy<Value = BoundaryGraph> {
        (2usize..9)
            .prop_flat_map(|n| {
                let tree = proptest::collection::vec(0usize..usize::MAX, n - 1);
                let extra = proptest::collection::vec((0usize..n, 0usize..n), 0..5);
                let bnd = proptest::collection::vec(0usize..n, 1..=n);
                (Just(n), tree, extra, bnd)
            })
            .prop_map(|(n, tree, extra, bnd)| {
                let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (tree[v - 1] % v, v)).collect();
                for (u, v) in extra {
                    if u != v && !edges.contains(&(u.min(v), u.max(v))) {
                        edges.push((u.min(v), u.max(v)));
                    }
                }
                let mut boundary = bnd;
                boundary.sort_unstable();
                boundary.dedup();
                BoundaryGraph::new(n, &edges, &boundary).unwrap()
            })
    }

    proptest! {
        #[test]
        fn dirichlet_energy_equals_quadratic_form(
            g in connected_graph_strategy(),
            raw in proptest::collection::vec(-10.0f64..10.0, 16),
        ) {
            let n = g.n_vertices();
            let f = &raw[..n];
            let q = g.dirichlet_energy(f).unwrap();
            let l = g.laplacian();
            let mut lf = vec![0.0; n];
            l.matvec(f, &mut lf);
            let quad: f64 = f.iter().zip(&lf).map(|(a, b)| a * b).sum();
            prop_assert!((q - quad).abs() <= 1e-12 * (1.0 + q.abs()));
            let qb = g.boundary_energy(f).unwrap();
            prop_assert!(qb <= q + 1e-12);
        }

        #[test]
        fn hop_matrix_is_metric(g in connected_graph_strategy()) {
            let h = g.hop_distance_matrix();
            let n = g.n_vertices();
            for i in 0..n {
                prop_assert_eq!(h.get(i, i), Some(0));
                for j in 0..n {
                    prop_assert_eq!(h.raw(i, j), h.raw(j, i));
                    for k in 0..n {
                        if let (Some(ij), Some(jk), Some(ik)) = (h.get(i, j), h.get(j, k), h.get(i, k)) {
                            prop_assert!(ik <= ij + jk);
                        }
                    }
                }
            }
        }
    }
}
