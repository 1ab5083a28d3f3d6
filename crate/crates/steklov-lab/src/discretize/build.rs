//! Turning a sampled domain into an ε-net graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graphs::BoundaryGraph;

use super::domain::SampledDomain;
use super::{DiscretizeError, Result};

/// Chart dimension of the sampled surfaces.
pub const DIMENSION: usize = 2;

/// Slack below a strict separation or edge threshold: distances within one
/// part in 10^12 of the cutoff count as *at* the cutoff, so float noise in
/// shortest-path sums cannot flip a decision.
const CUT_SLACK: f64 = 1e-12;

/// Slack for inclusive gates (net spacing, eligibility depth, coverage).
const GATE_SLACK: f64 = 1e-9;

/// Scale parameters of a discretization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationParams {
    /// Net spacing ε: vertices are ε-separated, edges reach to 3ε, and
    /// boundary partners sit 4ε deep.
    pub eps: f64,
    /// Lower bound on the scale at which the domain looks flat; the net
    /// only makes sense when `4 * eps < r0`.
    pub r0: f64,
    /// Curvature bound recorded with the run; flat domains use zero.
    pub kappa: f64,
}

impl DiscretizationParams {
    pub fn new(eps: f64, r0: f64, kappa: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(DiscretizeError::BadParams(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(DiscretizeError::BadParams(format!(
                "r0 must be positive and finite, got {r0}"
            )));
        }
        if !(4.0 * eps < r0) {
            return Err(DiscretizeError::BadParams(format!(
                "need 4 * eps < r0, got eps {eps}, r0 {r0}"
            )));
        }
        if !kappa.is_finite() {
            return Err(DiscretizeError::BadParams(format!(
                "kappa must be finite, got {kappa}"
            )));
        }
        Ok(Self { eps, r0, kappa })
    }

    /// Parameters for a flat domain with just enough room for the scale.
    pub fn flat(eps: f64) -> Result<Self> {
        Self::new(eps, 4.2 * eps, 0.0)
    }
}

/// Greedy ε-net over `n` candidates taken in index order: candidate `i`
/// joins the net when its distance to every already kept candidate is at
/// least `eps`.  Returns the kept indices, ascending.
pub fn maximal_separated_set<F>(n: usize, eps: f64, mut dist: F) -> Vec<usize>
where
    F: FnMut(usize, usize) -> f64,
{
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        if kept.iter().all(|&j| dist(i, j) >= eps) {
            kept.push(i);
        }
    }
    kept
}

/// An ε-net graph built over a sampled domain.
///
/// Graph vertices `0..nb` are the boundary vertices, in walk order; the
/// rest are interior.  Every boundary vertex is tied to a designated
/// interior partner one collar depth below it.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub graph: BoundaryGraph,
    /// Domain sample carrying each graph vertex.
    pub vertex_locations: Vec<u32>,
    /// `(boundary vertex, interior partner)` pairs, one per boundary
    /// vertex; the pair is always joined by an edge.
    pub partners: Vec<(usize, usize)>,
    /// `(walk, position)` of each boundary vertex on its boundary circle.
    pub boundary_positions: Vec<(usize, usize)>,
    /// Spacing the net was built at.
    pub eps: f64,
}

fn block_ball(domain: &SampledDomain, eps: f64, p: usize, blocked: &mut [bool]) {
    for (q, d) in domain.distances_within(p, eps) {
        if d < eps - CUT_SLACK {
            blocked[q as usize] = true;
        }
    }
}

fn claim(domain: &SampledDomain, eps: f64, p: usize, selected: &mut Vec<u32>, blocked: &mut [bool]) {
    selected.push(p as u32);
    block_ball(domain, eps, p, blocked);
}

/// Builds the ε-net graph of a collared domain.
///
/// Boundary vertices are an ε-net of each boundary circle in its intrinsic
/// metric.  Interior vertices are a greedy ε-net of the samples at collar
/// depth at least 4ε, seeded first with the *foot* of every boundary
/// vertex (the sample 4ε straight below it on its collar column), then
/// with `seeds`, then with all remaining samples by id.  Feet are always
/// kept, even where two collar columns come closer than ε through the bulk
/// (this happens near the tips of boundary slits); everything else is
/// ε-separated from the whole interior net.  Edges join vertices closer
/// than 3ε in the background metric, plus one edge from each boundary
/// vertex to its foot.
pub fn build_discretization(
    domain: &SampledDomain,
    params: &DiscretizationParams,
    seeds: Option<&[usize]>,
) -> Result<Discretization> {
    let eps = params.eps;
    let n = domain.n_points();
    if domain.boundary_walks().is_empty() {
        return Err(DiscretizeError::BadInput("domain has no boundary circles".into()));
    }
    if domain.h_bg() > eps / 4.0 + CUT_SLACK {
        return Err(DiscretizeError::BadParams(format!(
            "background step {} too coarse for eps {eps}; need at most eps / 4",
            domain.h_bg()
        )));
    }
    let need = 4.0 * eps;
    let layers = domain.collar_layers();
    if layers == 0 {
        return Err(DiscretizeError::CollarTooShallow { needed: need, available: 0.0 });
    }
    // Collar columns have unit nominal depth split into `layers` rings.
    let foot_steps = (need * layers as f64 - GATE_SLACK).ceil() as usize;
    if foot_steps > layers {
        return Err(DiscretizeError::CollarTooShallow { needed: need, available: 1.0 });
    }
    let foot_ring = layers - foot_steps;

    // Boundary vertices: greedy net along each circle.  Walking the rim in
    // arc order, the nearest kept vertex is always the previous one or,
    // wrapping around, the first, so two gap checks decide membership.
    let mut boundary_positions: Vec<(usize, usize)> = Vec::new();
    for w in 0..domain.boundary_walks().len() {
        let (prefix, total) = domain.walk_prefix(w);
        let mut last = 0usize;
        boundary_positions.push((w, 0));
        for i in 1..prefix.len() {
            if prefix[i] - prefix[last] >= eps - GATE_SLACK
                && total - prefix[i] >= eps - GATE_SLACK
            {
                boundary_positions.push((w, i));
                last = i;
            }
        }
    }
    let nb = boundary_positions.len();

    let eligible = |p: usize| -> bool {
        match domain.point(p).collar_t {
            None => true,
            Some(t) => t >= need - GATE_SLACK,
        }
    };

    // Interior net: feet first, then caller seeds, then everything by id.
    // Feet are forced — every boundary vertex needs its partner — so they
    // are exempt from the ε-separation claim among themselves: near the tip
    // of a boundary slit two collar columns approach to about ε/2 through
    // the bulk even though their rim vertices are well separated along the
    // walk.  Each foot still blocks its ε-ball against the greedy fill.
    let mut selected: Vec<u32> = Vec::new();
    let mut blocked = vec![false; n];
    for &(w, pos) in &boundary_positions {
        let foot = domain.collar_rings()[w][foot_ring][pos] as usize;
        debug_assert!(eligible(foot), "collar foot shallower than its own depth");
        selected.push(foot as u32);
    }
    {
        let mut seen = selected.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(DiscretizeError::Inconsistent(
                "two boundary vertices share a collar foot".into(),
            ));
        }
    }
    for &foot in &selected {
        block_ball(domain, eps, foot as usize, &mut blocked);
    }
    if let Some(seeds) = seeds {
        for &p in seeds {
            if p >= n {
                return Err(DiscretizeError::BadInput(format!(
                    "seed {p} out of range for {n} samples"
                )));
            }
            if !eligible(p) {
                return Err(DiscretizeError::BadInput(format!(
                    "seed {p} lies too close to the boundary"
                )));
            }
            if !blocked[p] {
                claim(domain, eps, p, &mut selected, &mut blocked);
            }
        }
    }
    for p in 0..n {
        if !blocked[p] && eligible(p) {
            claim(domain, eps, p, &mut selected, &mut blocked);
        }
    }

    // Graph numbering: boundary first, then the interior net in selection
    // order, so the foot of boundary vertex b is interior vertex nb + b.
    let mut vertex_locations: Vec<u32> = Vec::with_capacity(nb + selected.len());
    for &(w, pos) in &boundary_positions {
        vertex_locations.push(domain.boundary_walks()[w][pos]);
    }
    vertex_locations.extend_from_slice(&selected);
    let n_v = vertex_locations.len();
    let mut vert_of: Vec<Option<u32>> = vec![None; n];
    for (g, &p) in vertex_locations.iter().enumerate() {
        if vert_of[p as usize].is_some() {
            return Err(DiscretizeError::Inconsistent(format!(
                "sample {p} carries two graph vertices"
            )));
        }
        vert_of[p as usize] = Some(g as u32);
    }

    let reach = 3.0 * eps;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for g in 0..n_v {
        let p = vertex_locations[g] as usize;
        for (q, d) in domain.distances_within(p, reach) {
            if d >= reach - CUT_SLACK {
                continue;
            }
            if let Some(h) = vert_of[q as usize] {
                let h = h as usize;
                if h != g {
                    edges.insert((g.min(h), g.max(h)));
                }
            }
        }
    }
    let mut partners = Vec::with_capacity(nb);
    for b in 0..nb {
        // Feet sit a full collar depth away, past the 3ε reach, so this
        // edge is always new.
        edges.insert((b, nb + b));
        partners.push((b, nb + b));
    }

    // Every sample must see a vertex within 4ε, else the net missed a
    // pocket of the domain.
    let sources: Vec<usize> = vertex_locations.iter().map(|&p| p as usize).collect();
    let cover = domain.multi_source_distances(&sources);
    let limit = need + GATE_SLACK;
    for (p, &d) in cover.iter().enumerate() {
        if d > limit {
            return Err(DiscretizeError::Inconsistent(format!(
                "sample {p} lies {d:.6} from every net vertex (limit {limit:.6})"
            )));
        }
    }

    let edge_list: Vec<(usize, usize)> = edges.into_iter().collect();
    let boundary_ids: Vec<usize> = (0..nb).collect();
    let graph = BoundaryGraph::new(n_v, &edge_list, &boundary_ids)?;
    Ok(Discretization { graph, vertex_locations, partners, boundary_positions, eps })
}

/// Pushes a sampled function down to the net: each vertex takes the mean
/// of `values` over its 3ε ball, boundary vertices averaging along their
/// own circle in the intrinsic metric, interior vertices over the
/// background ball.
pub fn discretize_function(
    domain: &SampledDomain,
    disc: &Discretization,
    values: &[f64],
) -> Result<Vec<f64>> {
    if values.len() != domain.n_points() {
        return Err(DiscretizeError::BadInput(format!(
            "{} values for {} samples",
            values.len(),
            domain.n_points()
        )));
    }
    let reach = 3.0 * disc.eps;
    let nb = disc.partners.len();
    let mut out = Vec::with_capacity(disc.vertex_locations.len());
    for (g, &p) in disc.vertex_locations.iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        if g < nb {
            let (w, pos) = disc.boundary_positions[g];
            let (prefix, total) = domain.walk_prefix(w);
            for (i, &q) in domain.boundary_walks()[w].iter().enumerate() {
                let gap = (prefix[i] - prefix[pos]).abs();
                let d = gap.min(total - gap);
                if d < reach - CUT_SLACK {
                    sum += values[q as usize];
                    count += 1;
                }
            }
        } else {
            for (q, d) in domain.distances_within(p as usize, reach) {
                if d < reach - CUT_SLACK {
                    sum += values[q as usize];
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(DiscretizeError::EmptyBall(p as usize));
        }
        out.push(sum / count as f64);
    }
    Ok(out)
}
