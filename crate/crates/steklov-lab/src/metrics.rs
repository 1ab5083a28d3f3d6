//! Finite metric spaces and rough-isometry checks.
//!
//! A map `F: X -> Y` between metric spaces is a rough isometry with
//! constants `(a, b, tau)` when
//! `d(x1, x2)/a - b <= d(F x1, F x2) <= a * d(x1, x2) + b` for every pair
//! and every point of `Y` lies within `tau` of the image.  This module
//! verifies such constants, fits minimal ones over a fixed grid, and
//! checks the two-sided distance bounds that an `eps`-discretization graph
//! must satisfy against its ambient space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{BoundaryGraph, HopMatrix};

/// Errors from metric-space construction and checks.
#[derive(Debug, Error)]
pub enum MetricError {
    #[error("invalid metric data: {0}")]
    BadInput(String),
    #[error("distance matrix asymmetric at ({i}, {j}): {defect:.3e}")]
    Asymmetric { i: usize, j: usize, defect: f64 },
    #[error("negative distance {value:.3e} at ({i}, {j})")]
    Negative { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal {value:.3e} at point {i}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k}) by {defect:.3e}")]
    TriangleViolation { i: usize, j: usize, k: usize, defect: f64 },
    #[error("point {i} cannot reach point {j}; a finite metric space must be connected")]
    Disconnected { i: usize, j: usize },
    #[error("map has length {got}, expected {expected}")]
    MapLength { expected: usize, got: usize },
    #[error("map target {target} out of range for {n} points")]
    MapRange { target: usize, n: usize },
    #[error("distortion not representable on the grid; witness pair ({i}, {j})")]
    UnboundedDistortion { i: usize, j: usize },
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, MetricError>;

/// Absolute tolerance for the triangle-inequality invariant.
const TRIANGLE_TOL: f64 = 1e-9;
/// Exhaustive triangle checking up to this many points; beyond it a
/// deterministic sample of triples is tested instead.
const TRIANGLE_EXHAUSTIVE: usize = 600;

/// A finite metric space given by its full distance matrix.
///
/// Construction verifies symmetry, nonnegativity, zero diagonal, and the
/// triangle inequality (exhaustively for small spaces, on a fixed
/// pseudo-random sample of triples for large ones).  Distinct points at
/// distance zero are allowed but flag the space as a pseudo-metric.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    n: usize,
    d: Vec<f64>,
    pseudo: bool,
}

impl FiniteMetricSpace {
    /// Builds from a row-major `n x n` distance matrix.
    pub fn new(n: usize, d: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(MetricError::BadInput("need at least one point".into()));
        }
        if d.len() != n * n {
            return Err(MetricError::BadInput(format!(
                "expected {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            let diag = d[i * n + i];
            if diag != 0.0 {
                return Err(MetricError::NonzeroDiagonal { i, value: diag });
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MetricError::Negative { i, j, value: v });
                }
                let defect = (v - d[j * n + i]).abs();
                if defect > TRIANGLE_TOL {
                    return Err(MetricError::Asymmetric { i, j, defect });
                }
            }
        }
        let mut data = d.to_vec();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        let space = Self { n, d: data, pseudo: false };
        space.check_triangles()?;
        let mut pseudo = false;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                if space.d[i * n + j] == 0.0 {
                    pseudo = true;
                    break 'outer;
                }
            }
        }
        Ok(Self { pseudo, ..space })
    }

    fn check_triangles(&self) -> Result<()> {
        let n = self.n;
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            let defect = self.d[i * n + k] - self.d[i * n + j] - self.d[j * n + k];
            if defect > TRIANGLE_TOL {
                return Err(MetricError::TriangleViolation { i, j, k, defect });
            }
            Ok(())
        };
        if n <= TRIANGLE_EXHAUSTIVE {
            let results: Vec<Result<()>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    for j in 0..n {
                        for k in 0..n {
                            check(i, j, k)?;
                        }
                    }
                    Ok(())
                })
                .collect();
            for r in results {
                r?;
            }
        } else {
            // Fixed multiplicative-congruential sample: deterministic and
            // independent of thread count.
            let mut state = 0x2545F4914F6CDD1Du64;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            for _ in 0..2_000_000 {
                let i = (next() % n as u64) as usize;
                let j = (next() % n as u64) as usize;
                let k = (next() % n as u64) as usize;
                check(i, j, k)?;
            }
        }
        Ok(())
    }

    /// Number of points.
    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Whether distinct points at distance zero exist.
    pub fn is_pseudo(&self) -> bool {
        self.pseudo
    }

    /// Distance between points `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Euclidean metric on a finite point cloud.
    pub fn from_coords(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(MetricError::BadInput("need at least one point".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(MetricError::BadInput("inconsistent coordinate dimensions".into()));
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dist: f64 = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d[i * n + j] = dist;
                d[j * n + i] = dist;
            }
        }
        Self::new(n, &d)
    }

    /// Graph metric scaled by `step` (each hop costs `step`).  Fails when
    /// any pair is unreachable.
    pub fn from_hop_matrix(h: &HopMatrix, step: f64) -> Result<Self> {
        let n = h.order();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                match h.get(i, j) {
                    Some(hops) => d[i * n + j] = step * hops as f64,
                    None => return Err(MetricError::Disconnected { i, j }),
                }
            }
        }
        Self::new(n, &d)
    }
}

/// Rough-isometry constants `(a, b, tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughConstants {
    /// Multiplicative distortion, at least 1.
    pub a: f64,
    /// Additive distortion, nonnegative.
    pub b: f64,
    /// Covering radius, nonnegative.
    pub tau: f64,
}

impl RoughConstants {
    /// Validated constructor.
    pub fn new(a: f64, b: f64, tau: f64) -> Result<Self> {
        if !(a >= 1.0) || !(b >= 0.0) || !(tau >= 0.0) {
            return Err(MetricError::BadInput(format!(
                "need a >= 1, b >= 0, tau >= 0; got ({a}, {b}, {tau})"
            )));
        }
        Ok(Self { a, b, tau })
    }
}

/// Worst pair found during verification: the pair whose inequality excess
/// over `b` is largest (may still satisfy the bound).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairWitness {
    pub x1: usize,
    pub x2: usize,
    pub d_source: f64,
    pub d_image: f64,
    /// `max(d_source/a - d_image, d_image - a * d_source)`; the pair
    /// inequalities hold iff this is at most `b`.
    pub excess: f64,
}

/// The target point farthest from the image set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverWitness {
    pub y: usize,
    pub distance_to_image: f64,
}

/// Outcome of [`verify_rough_isometry`].
#[derive(Debug, Clone, Serialize)]
pub struct RoughIsometryReport {
    pub holds: bool,
    pub pairs_ok: bool,
    pub covering_ok: bool,
    pub worst_pair: Option<PairWitness>,
    pub worst_cover: Option<CoverWitness>,
}

impl RoughIsometryReport {
    /// JSON rendering of the report with its witnesses.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

fn validate_map(x: &FiniteMetricSpace, y: &FiniteMetricSpace, map: &[usize]) -> Result<()> {
    if map.len() != x.n_points() {
        return Err(MetricError::MapLength { expected: x.n_points(), got: map.len() });
    }
    for &t in map {
        if t >= y.n_points() {
            return Err(MetricError::MapRange { target: t, n: y.n_points() });
        }
    }
    Ok(())
}

/// Largest inequality excess over all point pairs, with its witness.
fn worst_pair_excess(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    map: &[usize],
    a: f64,
) -> Option<PairWitness> {
    let n = x.n_points();
    let mut worst: Option<PairWitness> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x.distance(i, j);
            let dy = y.distance(map[i], map[j]);
            let excess = (dx / a - dy).max(dy - a * dx);
            if worst.map_or(true, |w| excess > w.excess) {
                worst = Some(PairWitness { x1: i, x2: j, d_source: dx, d_image: dy, excess });
            }
        }
    }
    worst
}

/// Farthest target point from the image set, with its distance.
fn worst_cover_gap(y: &FiniteMetricSpace, map: &[usize]) -> Option<CoverWitness> {
    let mut worst: Option<CoverWitness> = None;
    for t in 0..y.n_points() {
        let gap = map
            .iter()
            .map(|&img| y.distance(t, img))
            .fold(f64::INFINITY, f64::min);
        if worst.map_or(true, |w| gap > w.distance_to_image) {
            worst = Some(CoverWitness { y: t, distance_to_image: gap });
        }
    }
    worst
}

/// Checks whether `map: X -> Y` is a rough isometry at the given
/// constants.  Always produces a report; `holds` is the conjunction of the
/// pair inequalities and the closed-ball covering condition.
pub fn verify_rough_isometry(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    map: &[usize],
    c: RoughConstants,
) -> Result<RoughIsometryReport> {
    validate_map(x, y, map)?;
    let worst_pair = worst_pair_excess(x, y, map, c.a);
    let worst_cover = worst_cover_gap(y, map);
    let pairs_ok = worst_pair.map_or(true, |w| w.excess <= c.b);
    let covering_ok = worst_cover.map_or(true, |w| w.distance_to_image <= c.tau);
    Ok(RoughIsometryReport {
        holds: pairs_ok && covering_ok,
        pairs_ok,
        covering_ok,
        worst_pair,
        worst_cover,
    })
}

/// Multiplicative-constant grid scanned by [`fit_rough_constants`]:
/// `1.0, 1.05, ..., 16.0`.
pub fn stretch_grid() -> impl Iterator<Item = f64> {
    (0..=300).map(|k| 1.0 + 0.05 * k as f64)
}

/// Fits rough-isometry constants for `map`.
///
/// For each grid `a`, the smallest workable `b(a)` is the worst pair
/// excess (clamped at zero); the fit returns the grid point minimising
/// `b`, breaking ties toward smaller `a`, with `tau` computed exactly as
/// the farthest target point from the image.  The guarantee is the round
/// trip: verifying at the fitted constants always holds.
pub fn fit_rough_constants(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    map: &[usize],
) -> Result<RoughConstants> {
    validate_map(x, y, map)?;
    let mut best: Option<(f64, f64)> = None; // (b, a)
    for a in stretch_grid() {
        let excess = worst_pair_excess(x, y, map, a).map_or(0.0, |w| w.excess);
        let b = excess.max(0.0);
        if !b.is_finite() {
            let w = worst_pair_excess(x, y, map, a).unwrap();
            return Err(MetricError::UnboundedDistortion { i: w.x1, j: w.x2 });
        }
        if best.map_or(true, |(bb, _)| b < bb) {
            best = Some((b, a));
        }
    }
    let (b, a) = best.expect("grid is never empty");
    let tau = worst_cover_gap(y, map).map_or(0.0, |w| w.distance_to_image);
    RoughConstants::new(a, b, tau)
}

/// Two-sided comparison between an ambient metric and a discretization
/// graph metric: for every vertex pair,
/// `(eps/4) * hops - 10 <= d_M <= 4 * eps * hops`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretizationBoundsReport {
    pub holds: bool,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Smallest value of `d_M - ((eps/4) * hops - 10)` with its pair;
    /// negative means the lower bound fails there.
    pub lower_margin: Option<(usize, usize, f64)>,
    /// Smallest value of `4 * eps * hops - d_M` with its pair; negative
    /// means the upper bound fails there.
    pub upper_margin: Option<(usize, usize, f64)>,
    /// Vertex pairs with no graph path at all (each breaks the upper
    /// bound outright).
    pub unreachable_pairs: usize,
}

impl DiscretizationBoundsReport {
    /// JSON rendering of the report.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Streaming collector behind [`check_discretization_bounds`]: feed one
/// vertex's hop counts and ambient distances at a time, read the report at
/// the end.  This keeps memory flat when the pair data is produced row by
/// row (one BFS per vertex) instead of as a full matrix.
#[derive(Debug, Clone)]
pub struct DiscretizationBoundsAccumulator {
    eps: f64,
    lower: Option<(usize, usize, f64)>,
    upper: Option<(usize, usize, f64)>,
    unreachable: usize,
}

impl DiscretizationBoundsAccumulator {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(MetricError::BadInput(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { eps, lower: None, upper: None, unreachable: 0 })
    }

    /// Accounts for the pairs `(v, w)` with `w > v`.  `hops[w]` is the
    /// graph distance from `v` (`None` when unreachable), `ambient[w]` the
    /// domain distance between the carrier points; both slices must cover
    /// all vertices, entries up to `v` are ignored.
    pub fn push_row(&mut self, v: usize, hops: &[Option<u32>], ambient: &[f64]) -> Result<()> {
        if hops.len() != ambient.len() {
            return Err(MetricError::MapLength { expected: hops.len(), got: ambient.len() });
        }
        for w in (v + 1)..hops.len() {
            match hops[w] {
                None => self.unreachable += 1,
                Some(h) => {
                    let h = h as f64;
                    let dm = ambient[w];
                    let lm = dm - ((self.eps / 4.0) * h - 10.0);
                    let um = 4.0 * self.eps * h - dm;
                    if self.lower.map_or(true, |(_, _, m)| lm < m) {
                        self.lower = Some((v, w, lm));
                    }
                    if self.upper.map_or(true, |(_, _, m)| um < m) {
                        self.upper = Some((v, w, um));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> DiscretizationBoundsReport {
        let lower_ok = self.lower.map_or(true, |(_, _, m)| m >= 0.0);
        let upper_ok = self.unreachable == 0 && self.upper.map_or(true, |(_, _, m)| m >= 0.0);
        DiscretizationBoundsReport {
            holds: lower_ok && upper_ok,
            lower_ok,
            upper_ok,
            lower_margin: self.lower,
            upper_margin: self.upper,
            unreachable_pairs: self.unreachable,
        }
    }
}

/// Checks the discretization distance bounds for a graph sitting inside a
/// sampled domain.  `vertex_locations[v]` is the domain sample point
/// carrying graph vertex `v`.
pub fn check_discretization_bounds(
    domain: &FiniteMetricSpace,
    graph: &BoundaryGraph,
    vertex_locations: &[usize],
    eps: f64,
) -> Result<DiscretizationBoundsReport> {
    if vertex_locations.len() != graph.n_vertices() {
        return Err(MetricError::MapLength {
            expected: graph.n_vertices(),
            got: vertex_locations.len(),
        });
    }
    for &p in vertex_locations {
        if p >= domain.n_points() {
            return Err(MetricError::MapRange { target: p, n: domain.n_points() });
        }
    }
    let mut acc = DiscretizationBoundsAccumulator::new(eps)?;
    let hops = graph.hop_distance_matrix();
    let n = graph.n_vertices();
    let mut hop_row = vec![None; n];
    let mut amb_row = vec![0.0; n];
    for v in 0..n {
        for w in 0..n {
            hop_row[w] = hops.get(v, w);
            amb_row[w] = domain.distance(vertex_locations[v], vertex_locations[w]);
        }
        acc.push_row(v, &hop_row, &amb_row)?;
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{path_graph, BoundaryGraph};
    use proptest::prelude::*;

    fn line_space(points: &[f64]) -> FiniteMetricSpace {
        let coords: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        FiniteMetricSpace::from_coords(&coords).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            FiniteMetricSpace::new(2, &[0.0, 1.0, 2.0, 0.0]),
            Err(MetricError::Asymmetric { .. })
        ));
        assert!(matches!(
            FiniteMetricSpace::new(2, &[0.0, -1.0, -1.0, 0.0]),
            Err(MetricError::Negative { .. })
        ));
        assert!(matches!(
            FiniteMetricSpace::new(2, &[0.5, 1.0, 1.0, 0.0]),
            Err(MetricError::NonzeroDiagonal { .. })
        ));
        let bad_triangle = [0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
        assert!(matches!(
            FiniteMetricSpace::new(3, &bad_triangle),
            Err(MetricError::TriangleViolation { .. })
        ));
    }

    #[test]
    fn pseudo_metric_is_flagged_not_rejected() {
        let d = [0.0, 0.0, 0.0, 0.0];
        let m = FiniteMetricSpace::new(2, &d).unwrap();
        assert!(m.is_pseudo());
        let proper = line_space(&[0.0, 1.0]);
        assert!(!proper.is_pseudo());
    }

    #[test]
    fn identity_is_exact_isometry() {
        let x = line_space(&[0.0, 1.0, 2.5]);
        let map = vec![0, 1, 2];
        let c = RoughConstants::new(1.0, 0.0, 0.0).unwrap();
        let r = verify_rough_isometry(&x, &x, &map, c).unwrap();
        assert!(r.holds && r.pairs_ok && r.covering_ok);
    }

    #[test]
    fn doubling_map_constants() {
        let x = line_space(&[0.0, 1.0, 2.0]);
        let y = line_space(&[0.0, 2.0, 4.0]);
        let map = vec![0, 1, 2];
        let ok = verify_rough_isometry(&x, &y, &map, RoughConstants::new(2.0, 0.0, 0.0).unwrap())
            .unwrap();
        assert!(ok.holds);
        let bad = verify_rough_isometry(&x, &y, &map, RoughConstants::new(1.0, 0.0, 0.0).unwrap())
            .unwrap();
        assert!(!bad.holds && !bad.pairs_ok);
        let w = bad.worst_pair.unwrap();
        assert_eq!((w.x1, w.x2), (0, 2));
        assert!((w.excess - 2.0).abs() < 1e-12);

        let fit = fit_rough_constants(&x, &y, &map).unwrap();
        assert_eq!(fit.a, 2.0);
        assert_eq!(fit.b, 0.0);
        assert_eq!(fit.tau, 0.0);
    }

    #[test]
    fn identity_fit_prefers_smallest_stretch() {
        let x = line_space(&[0.0, 3.0, 7.0]);
        let fit = fit_rough_constants(&x, &x, &[0, 1, 2]).unwrap();
        assert_eq!((fit.a, fit.b, fit.tau), (1.0, 0.0, 0.0));
    }

    #[test]
    fn collapsing_map_needs_additive_slack_and_cover_radius() {
        let x = line_space(&[0.0, 1.0, 3.0]);
        let y = line_space(&[0.0, 5.0]);
        let map = vec![0, 0, 0];
        let fit = fit_rough_constants(&x, &y, &map).unwrap();
        // b(a) = diam(X)/a is minimised at the top of the grid.
        assert_eq!(fit.a, 16.0);
        assert!((fit.b - 3.0 / 16.0).abs() < 1e-12);
        assert_eq!(fit.tau, 5.0);
        assert!(verify_rough_isometry(&x, &y, &map, fit).unwrap().holds);
    }

    #[test]
    fn uncovered_point_is_reported() {
        let x = line_space(&[0.0]);
        let y = line_space(&[0.0, 9.0]);
        let c = RoughConstants::new(1.0, 0.0, 1.0).unwrap();
        let r = verify_rough_isometry(&x, &y, &[0], c).unwrap();
        assert!(!r.holds && r.pairs_ok && !r.covering_ok);
        let w = r.worst_cover.unwrap();
        assert_eq!(w.y, 1);
        assert_eq!(w.distance_to_image, 9.0);
    }

    #[test]
    fn discretization_bounds_simple_cases() {
        // Single vertex: vacuous.
        let dom = line_space(&[0.0, 1.0]);
        let g1 = BoundaryGraph::new(1, &[], &[0]).unwrap();
        let r = check_discretization_bounds(&dom, &g1, &[0], 0.5).unwrap();
        assert!(r.holds);

        // Path in a line sampled at unit spacing, eps = 1.
        let dom = line_space(&[0.0, 1.0, 2.0]);
        let g = path_graph(3, &[0, 2]).unwrap();
        let r = check_discretization_bounds(&dom, &g, &[0, 1, 2], 1.0).unwrap();
        assert!(r.holds, "{r:?}");

        // Adversarial: an edge between far-apart sample points breaks the
        // upper bound.
        let dom = line_space(&[0.0, 10.0]);
        let g = path_graph(2, &[0, 1]).unwrap();
        let r = check_discretization_bounds(&dom, &g, &[0, 1], 0.25).unwrap();
        assert!(!r.holds && !r.upper_ok && r.lower_ok);
        let (v, w, m) = r.upper_margin.unwrap();
        assert_eq!((v, w), (0, 1));
        assert!((m - (1.0 - 10.0)).abs() < 1e-12);
    }

    #[test]
    fn accumulator_matches_batch_checker() {
        let dom = line_space(&[0.0, 1.3, 2.1, 3.9]);
        let g = path_graph(4, &[0, 3]).unwrap();
        let locs = [0usize, 1, 2, 3];
        let batch = check_discretization_bounds(&dom, &g, &locs, 1.0).unwrap();

        let mut acc = DiscretizationBoundsAccumulator::new(1.0).unwrap();
        let hops = g.hop_distance_matrix();
        for v in 0..4 {
            let hop_row: Vec<Option<u32>> = (0..4).map(|w| hops.get(v, w)).collect();
            let amb_row: Vec<f64> = (0..4).map(|w| dom.distance(locs[v], locs[w])).collect();
            acc.push_row(v, &hop_row, &amb_row).unwrap();
        }
        let streamed = acc.finish();
        assert_eq!(batch.holds, streamed.holds);
        assert_eq!(batch.lower_margin, streamed.lower_margin);
        assert_eq!(batch.upper_margin, streamed.upper_margin);
        assert_eq!(batch.unreachable_pairs, streamed.unreachable_pairs);

        assert!(DiscretizationBoundsAccumulator::new(0.0).is_err());
    }

    #[test]
    fn hop_metric_requires_connectivity() {
        let g = BoundaryGraph::new(4, &[(0, 1), (2, 3)], &[0]).unwrap();
        let h = g.hop_distance_matrix();
        assert!(matches!(
            FiniteMetricSpace::from_hop_matrix(&h, 1.0),
            Err(MetricError::Disconnected { .. })
        ));
        let p = path_graph(4, &[0]).unwrap();
        let m = FiniteMetricSpace::from_hop_matrix(&p.hop_distance_matrix(), 0.5).unwrap();
        assert_eq!(m.distance(0, 3), 1.5);
    }

    fn cloud_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(
            proptest::collection::vec(-5.0f64..5.0, 2),
            2..10,
        )
    }

    proptest! {
        #[test]
        fn fit_then_verify_round_trips(
            xs in cloud_strategy(),
            ys in cloud_strategy(),
            pick in proptest::collection::vec(0usize..usize::MAX, 16),
        ) {
            let x = FiniteMetricSpace::from_coords(&xs).unwrap();
            let y = FiniteMetricSpace::from_coords(&ys).unwrap();
            let map: Vec<usize> = (0..x.n_points()).map(|i| pick[i] % y.n_points()).collect();
            let fit = fit_rough_constants(&x, &y, &map).unwrap();
            let report = verify_rough_isometry(&x, &y, &map, fit).unwrap();
            prop_assert!(report.holds, "fit {fit:?} failed: {report:?}");
        }

        #[test]
        fn verification_is_monotone_in_constants(
            xs in cloud_strategy(),
            ys in cloud_strategy(),
            pick in proptest::collection::vec(0usize..usize::MAX, 16),
            bump in (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0),
        ) {
            let x = FiniteMetricSpace::from_coords(&xs).unwrap();
            let y = FiniteMetricSpace::from_coords(&ys).unwrap();
            let map: Vec<usize> = (0..x.n_points()).map(|i| pick[i] % y.n_points()).collect();
            let fit = fit_rough_constants(&x, &y, &map).unwrap();
            let looser = RoughConstants::new(fit.a + bump.0, fit.b + bump.1, fit.tau + bump.2).unwrap();
            prop_assert!(verify_rough_isometry(&x, &y, &map, looser).unwrap().holds);
        }
    }
}
