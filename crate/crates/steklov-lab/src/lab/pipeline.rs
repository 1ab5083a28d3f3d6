//! The measurement pipeline behind the experiments: surface → collar →
//! finite-element boundary eigenvalues → background sampling → ε-net graph
//! → graph eigenvalues, plus an optional all-pairs metric-bounds audit.
//!
//! Each experiment row runs this pipeline once per surface.  Failures stay
//! scoped to their row — the runners record the reason and move on — with
//! one exception: an eigenvalue crossing its topological ceiling means the
//! solvers cannot be trusted, so it aborts the run.

use rayon::prelude::*;

use crate::continuum::{cylinder_mesh, fem_steklov, quasi_isometry_perturb, sigma2_length_bound};
use crate::discretize::{
    build_discretization, Discretization, DiscretizationParams, SampledDomain,
};
use crate::graphs::laplacian_lambda2;
use crate::graphs::random_regular_graph;
use crate::metrics::{DiscretizationBoundsAccumulator, DiscretizationBoundsReport};
use crate::steklov::steklov_sigma_k;
use crate::surfaces::{
    attach_collar, boundary_components, build_connected_boundary_surface, build_flat_surface,
    build_lattice_domain, complex_to_mesh, euler_genus, maximal_tree, FemMesh, PieceComplex,
};

use super::{
    row_seed, ExperimentConfig, LabError, Result, ResultRow, RowDiagnostics, RowReport,
};

/// Net vertices per work chunk in the bounds audit: caps peak memory at
/// `chunk * n_vertices` entries while the per-vertex rows parallelize.
const BOUNDS_CHUNK: usize = 128;

/// Slack on the topological ceiling gate.
const CEILING_SLACK: f64 = 1e-9;

/// The sampling mesh refines the eigenvalue mesh by this factor, so the
/// background spacing `1/(2m)` sits at or under a quarter of the default
/// net spacing.
const BG_REFINE: usize = 2;

/// The stability cylinder samples finer still: its stretched cells must
/// stay under the spacing gate at every configured stretch factor.
const STABILITY_BG_REFINE: usize = 4;

pub(super) struct Measurement {
    pub row: ResultRow,
    pub diag: RowDiagnostics,
}

/// Row-scoped outcome; the `Err` string is the recorded failure reason.
type RowResult = std::result::Result<Measurement, String>;

fn ctx<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> String {
    move |e| format!("{stage}: {e}")
}

/// Measures one surface given its eigenvalue mesh and its finer sampling
/// mesh (both already collared).
fn measure_meshes(
    fem_mesh: &FemMesh,
    bg_mesh: &FemMesh,
    label: usize,
    k: usize,
    cfg: &ExperimentConfig,
) -> RowResult {
    let (_, genus, b) = euler_genus(fem_mesh).map_err(ctx("surface topology"))?;
    let (_, lens) = boundary_components(fem_mesh);
    let boundary_length: f64 = lens.iter().sum();
    let area = fem_mesh.area();

    let fem = fem_steklov(fem_mesh, k, false).map_err(ctx("surface eigensolve"))?;

    let domain = SampledDomain::from_mesh(bg_mesh).map_err(ctx("background sampling"))?;
    let params =
        DiscretizationParams::new(cfg.eps, cfg.r0, 0.0).map_err(ctx("net parameters"))?;
    let disc = build_discretization(&domain, &params, None).map_err(ctx("net construction"))?;
    let part = steklov_sigma_k(&disc.graph, k).map_err(ctx("net eigensolve"))?;

    let bounds = if cfg.verify_bounds {
        Some(net_bounds_report(&domain, &disc)?)
    } else {
        None
    };

    let sigma2_fem = *fem.sigmas.get(1).ok_or("fewer than two surface eigenvalues")?;
    let sigma2_graph = *part.sigmas.get(1).ok_or("fewer than two net eigenvalues")?;
    if !(sigma2_graph > 0.0) {
        return Err(format!("net spectral gap {sigma2_graph:?} is not positive"));
    }

    let row = ResultRow {
        l: label,
        sigma2_graph,
        sigma2_fem,
        boundary_length,
        area,
        isoperimetric_ratio: boundary_length / area.sqrt(),
        genus,
        boundary_components: b,
        ratio: sigma2_fem / sigma2_graph,
        sigma2_times_length: sigma2_fem * boundary_length,
    };
    let diag = RowDiagnostics {
        n_fem_nodes: fem.n_nodes,
        fem_dense_path: fem.dense_path,
        fem_residual: fem.max_residual,
        n_net_vertices: disc.graph.n_vertices(),
        n_net_boundary: disc.graph.n_boundary(),
        net_max_degree: disc.graph.max_degree(),
        graph_residual: part.max_residual,
        bounds_hold: bounds.as_ref().map(|r| r.holds),
        bounds_lower_margin: bounds.as_ref().and_then(|r| r.lower_margin.map(|(_, _, m)| m)),
        bounds_upper_margin: bounds.as_ref().and_then(|r| r.upper_margin.map(|(_, _, m)| m)),
        bounds_unreachable: bounds.as_ref().map(|r| r.unreachable_pairs),
        generator_lambda2: None,
        sigmas_fem: fem.sigmas.clone(),
        sigmas_graph: part.sigmas.clone(),
        sigma_ratios: fem
            .sigmas
            .iter()
            .zip(&part.sigmas)
            .skip(1)
            .map(|(f, g)| f / g)
            .collect(),
        stretch: None,
        stability_ratios: None,
        stability_window: None,
        stability_ok: None,
        sigma2_length_ceiling: sigma2_length_bound(genus),
    };
    Ok(Measurement { row, diag })
}

/// Meshes a complex at the two resolutions, collars both, and measures.
fn measure_complex(
    c: &PieceComplex,
    label: usize,
    k: usize,
    cfg: &ExperimentConfig,
) -> RowResult {
    let fem_mesh = complex_to_mesh(c, cfg.m).map_err(ctx("meshing"))?;
    let fem_collared = attach_collar(&fem_mesh, cfg.m).map_err(ctx("collar"))?;
    let bg_m = BG_REFINE * cfg.m;
    let bg_mesh = complex_to_mesh(c, bg_m).map_err(ctx("background meshing"))?;
    let bg_collared = attach_collar(&bg_mesh, bg_m).map_err(ctx("background collar"))?;
    measure_meshes(&fem_collared, &bg_collared, label, k, cfg)
}

/// Converts a row outcome into a report, enforcing the topological ceiling:
/// `sigma2 * length` above `8π(genus + 1)` aborts the whole run.
fn finish_row(cfg: &ExperimentConfig, l: usize, outcome: RowResult) -> Result<RowReport> {
    match outcome {
        Err(msg) => Ok(RowReport { l, row: None, diagnostics: None, error: Some(msg) }),
        Ok(m) => {
            let bound = m.diag.sigma2_length_ceiling;
            if m.row.sigma2_times_length > bound * (1.0 + CEILING_SLACK) {
                return Err(LabError::BoundViolation {
                    label: format!("{} l={l}", cfg.tag),
                    value: m.row.sigma2_times_length,
                    bound,
                });
            }
            Ok(RowReport { l, row: Some(m.row), diagnostics: Some(m.diag), error: None })
        }
    }
}

/// app1 and compare: planar lattice domains, `k` eigenvalues per row.
pub(super) fn run_lattice(cfg: &ExperimentConfig, k: usize) -> Result<Vec<RowReport>> {
    let mut reports = Vec::with_capacity(cfg.sizes.len());
    for &l in &cfg.sizes {
        let outcome = build_lattice_domain(l)
            .map_err(ctx("lattice build"))
            .and_then(|c| measure_complex(&c, l, k, cfg));
        reports.push(finish_row(cfg, l, outcome)?);
    }
    Ok(reports)
}

/// app2 and app3: flat surfaces glued from seeded random 4-regular graphs;
/// `carved` switches to the single-boundary variant.
pub(super) fn run_flat(cfg: &ExperimentConfig, carved: bool) -> Result<Vec<RowReport>> {
    let mut reports = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        reports.push(finish_row(cfg, n, flat_row(cfg, n, carved))?);
    }
    Ok(reports)
}

fn flat_row(cfg: &ExperimentConfig, n: usize, carved: bool) -> RowResult {
    let seed = row_seed(cfg.seed, cfg.tag, n);
    let g = random_regular_graph(n, 4, seed).map_err(ctx("generator graph"))?;
    let gap = laplacian_lambda2(&g).map_err(ctx("generator gap"))?;
    let c = if carved {
        let tree = maximal_tree(&g).map_err(ctx("spanning tree"))?;
        build_connected_boundary_surface(&g, &tree).map_err(ctx("carved surface"))?
    } else {
        build_flat_surface(&g).map_err(ctx("flat surface"))?
    };
    let mut m = measure_complex(&c, n, 2, cfg)?;
    let want_b = if carved { 1 } else { n };
    if m.row.boundary_components != want_b {
        return Err(format!(
            "expected {want_b} boundary circles, found {}",
            m.row.boundary_components
        ));
    }
    if m.row.genus != n + 1 {
        return Err(format!("expected genus {}, found {}", n + 1, m.row.genus));
    }
    m.diag.generator_lambda2 = Some(gap.lambda2);
    Ok(m)
}

/// stability: stretch a collared cylinder along its circumference and track
/// the ratio of each net eigenvalue to its unstretched value.
pub(super) fn run_stability(cfg: &ExperimentConfig) -> Result<Vec<RowReport>> {
    const K: usize = 6;
    let base = stability_net_sigmas(cfg, K)
        .map_err(|msg| LabError::Config(format!("stability baseline: {msg}")))?;
    let mut reports = Vec::with_capacity(cfg.stretch.len());
    for &a in &cfg.stretch {
        let label = (a * 100.0).round() as usize;
        reports.push(finish_row(cfg, label, stability_row(cfg, a, K, &base))?);
    }
    Ok(reports)
}

/// Collared cylinder meshes at the eigenvalue and sampling resolutions,
/// stretched by `a` along the circumference (axis 0).  Stretching the axis
/// direction instead would deepen the collar and with it the boundary-to-
/// partner edges, pushing them past the net's edge-length contract.
fn stability_meshes(
    cfg: &ExperimentConfig,
    a: f64,
) -> std::result::Result<(FemMesh, FemMesh), String> {
    let build = |m: usize| -> std::result::Result<FemMesh, String> {
        let cyl = cylinder_mesh(m).map_err(ctx("cylinder mesh"))?;
        let collared = attach_collar(&cyl, m).map_err(ctx("cylinder collar"))?;
        if a == 1.0 {
            Ok(collared)
        } else {
            quasi_isometry_perturb(&collared, a, 0).map_err(ctx("stretch"))
        }
    };
    Ok((build(cfg.m)?, build(STABILITY_BG_REFINE * cfg.m)?))
}

/// Net eigenvalues of the unstretched cylinder, the denominator of every
/// stability ratio.
fn stability_net_sigmas(
    cfg: &ExperimentConfig,
    k: usize,
) -> std::result::Result<Vec<f64>, String> {
    let (_, bg) = stability_meshes(cfg, 1.0)?;
    let domain = SampledDomain::from_mesh(&bg).map_err(ctx("background sampling"))?;
    let params =
        DiscretizationParams::new(cfg.eps, cfg.r0, 0.0).map_err(ctx("net parameters"))?;
    let disc = build_discretization(&domain, &params, None).map_err(ctx("net construction"))?;
    let part = steklov_sigma_k(&disc.graph, k).map_err(ctx("net eigensolve"))?;
    Ok(part.sigmas)
}

fn stability_row(cfg: &ExperimentConfig, a: f64, k: usize, base: &[f64]) -> RowResult {
    let (fem_mesh, bg_mesh) = stability_meshes(cfg, a)?;
    let label = (a * 100.0).round() as usize;
    let mut m = measure_meshes(&fem_mesh, &bg_mesh, label, k, cfg)?;
    // Ratios start at the second eigenvalue; the first is zero on both
    // sides.
    let ratios: Vec<f64> =
        m.diag.sigmas_graph.iter().zip(base).skip(1).map(|(s, b)| s / b).collect();
    let window = (a.powi(-10), a.powi(10));
    let ok = ratios
        .iter()
        .all(|r| *r >= window.0 * (1.0 - 1e-9) && *r <= window.1 * (1.0 + 1e-9));
    m.diag.stretch = Some(a);
    m.diag.stability_ratios = Some(ratios);
    m.diag.stability_window = Some(window);
    m.diag.stability_ok = Some(ok);
    Ok(m)
}

/// Audits the net against its carrier domain pair by pair: graph hops by
/// breadth-first search per vertex, ambient distances by a shortest-path
/// sweep from each vertex's carrier sample, folded into the streaming
/// checker.  Exact but quadratic — opt in via `verify_bounds`.
pub(super) fn net_bounds_report(
    domain: &SampledDomain,
    disc: &Discretization,
) -> std::result::Result<DiscretizationBoundsReport, String> {
    let n = disc.graph.n_vertices();
    let adj: Vec<Vec<u32>> = (0..n)
        .map(|v| disc.graph.neighbors(v).map(|u| u as u32).collect())
        .collect();
    let mut acc =
        DiscretizationBoundsAccumulator::new(disc.eps).map_err(ctx("bounds audit"))?;
    let mut start = 0;
    while start < n {
        let end = (start + BOUNDS_CHUNK).min(n);
        let rows: Vec<(Vec<Option<u32>>, Vec<f64>)> = (start..end)
            .into_par_iter()
            .map(|v| bounds_row(domain, disc, &adj, v))
            .collect();
        for (i, (hops, ambient)) in rows.iter().enumerate() {
            acc.push_row(start + i, hops, ambient).map_err(ctx("bounds audit"))?;
        }
        start = end;
    }
    Ok(acc.finish())
}

fn bounds_row(
    domain: &SampledDomain,
    disc: &Discretization,
    adj: &[Vec<u32>],
    v: usize,
) -> (Vec<Option<u32>>, Vec<f64>) {
    let n = adj.len();
    let mut hops: Vec<Option<u32>> = vec![None; n];
    hops[v] = Some(0);
    let mut frontier = vec![v as u32];
    let mut next: Vec<u32> = Vec::new();
    let mut depth = 0u32;
    while !frontier.is_empty() {
        depth += 1;
        for &u in &frontier {
            for &w in &adj[u as usize] {
                if hops[w as usize].is_none() {
                    hops[w as usize] = Some(depth);
                    next.push(w);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    let all = domain.multi_source_distances(&[disc.vertex_locations[v] as usize]);
    let ambient: Vec<f64> =
        (0..n).map(|w| all[disc.vertex_locations[w] as usize]).collect();
    (hops, ambient)
}
