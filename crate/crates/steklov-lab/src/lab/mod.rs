//! Experiment harness: configured runs over the surface families, CSV and
//! JSON persistence, and a run manifest.
//!
//! Five experiments share one measurement pipeline (see [`pipeline`]): build
//! a surface, attach its unit collar, solve the boundary eigenproblem by
//! finite elements, sample the surface at background resolution, extract the
//! ε-net graph, solve the graph eigenproblem, and verify the net's metric
//! bounds.  `app1` runs it over planar lattice domains with growing hole
//! counts, `app2` over flat surfaces glued from random 4-regular graphs,
//! `app3` over their carved single-boundary variants, `compare` collects
//! eigenvalue ratios over the lattice family, and `stability` stretches a
//! cylinder and tracks the spectrum's drift.

mod pipeline;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

/// Errors from configuration and experiment plumbing.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An eigenvalue cleared its topological ceiling: either the solver or
    /// the surface construction is wrong, so the whole run stops.
    #[error(
        "surface bound violated on row {label}: sigma2 * length = {value} exceeds {bound}"
    )]
    BoundViolation { label: String, value: f64, bound: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, LabError>;

/// Declared flatness radius: "the domain looks flat below this scale".  The
/// default spacing 0.25 sits just inside the required quarter of it.
pub const DEFAULT_R0: f64 = 1.05;

/// The five experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentTag {
    /// Planar lattice domains: isoperimetric ratio grows, σ₂·L stays flat.
    App1,
    /// Flat surfaces over random 4-regular graphs: σ₂·L grows with size.
    App2,
    /// Carved variants of app2 with a single boundary circle.
    App3,
    /// Manifold-to-graph eigenvalue ratios over the lattice family.
    Compare,
    /// Spectrum drift under uniaxial stretches of a cylinder.
    Stability,
}

impl ExperimentTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentTag::App1 => "app1",
            ExperimentTag::App2 => "app2",
            ExperimentTag::App3 => "app3",
            ExperimentTag::Compare => "compare",
            ExperimentTag::Stability => "stability",
        }
    }

    pub fn all() -> [ExperimentTag; 5] {
        [
            ExperimentTag::App1,
            ExperimentTag::App2,
            ExperimentTag::App3,
            ExperimentTag::Compare,
            ExperimentTag::Stability,
        ]
    }
}

impl fmt::Display for ExperimentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentTag {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "app1" => Ok(ExperimentTag::App1),
            "app2" => Ok(ExperimentTag::App2),
            "app3" => Ok(ExperimentTag::App3),
            "compare" => Ok(ExperimentTag::Compare),
            "stability" => Ok(ExperimentTag::Stability),
            other => Err(LabError::Config(format!(
                "unknown experiment `{other}`; expected app1|app2|app3|compare|stability"
            ))),
        }
    }
}

/// A fully specified run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub tag: ExperimentTag,
    /// Row sizes: lattice width for app1/compare, generator graph order for
    /// app2/app3; ignored by stability, which iterates `stretch`.
    pub sizes: Vec<usize>,
    /// Net spacing ε of the ε-discretization.
    pub eps: f64,
    /// Declared flatness radius; the net needs `eps < r0 / 4`.
    pub r0: f64,
    /// Mesh subdivision per unit square for the eigenvalue solve; the
    /// sampling mesh is twice as fine.
    pub m: usize,
    /// Master seed; every row derives its own stream from (seed, tag, size).
    pub seed: u64,
    /// Stretch factors for the stability experiment.
    pub stretch: Vec<f64>,
    /// Audit the net's two-sided metric bounds over every vertex pair.
    /// Exact but quadratic in net size, so off by default.
    pub verify_bounds: bool,
    /// Output directory for CSV/JSON and the manifest.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The documented defaults for a tag.
    pub fn default_for(tag: ExperimentTag) -> Self {
        let sizes = match tag {
            ExperimentTag::App1 | ExperimentTag::Compare => vec![2, 3, 4, 5, 6],
            ExperimentTag::App2 | ExperimentTag::App3 => vec![5, 8, 12, 16],
            ExperimentTag::Stability => vec![],
        };
        Self {
            tag,
            sizes,
            eps: 0.25,
            r0: DEFAULT_R0,
            m: 8,
            seed: 7,
            stretch: vec![1.0, 1.1, 1.2],
            verify_bounds: false,
            out_dir: None,
        }
    }

    /// Parses a flat `key = value` config file on top of the tag defaults.
    /// Keys: `experiment`, `sizes` (comma list), `eps`, `r0`, `m`, `seed`,
    /// `stretch` (comma list), `out`.  `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut tag: Option<ExperimentTag> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                LabError::Config(format!("line {}: expected `key = value`, got `{line}`", ln + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key == "experiment" {
                tag = Some(value.parse()?);
            } else {
                pairs.push((key, value));
            }
        }
        let tag = tag.ok_or_else(|| {
            LabError::Config("config must set `experiment = <tag>`".into())
        })?;
        let mut cfg = Self::default_for(tag);
        for (key, value) in pairs {
            let bad = |what: &str| LabError::Config(format!("key `{key}`: {what} `{value}`"));
            match key.as_str() {
                "sizes" => {
                    cfg.sizes = value
                        .split(',')
                        .map(|t| t.trim().parse().map_err(|_| bad("bad size")))
                        .collect::<Result<_>>()?;
                }
                "eps" => cfg.eps = value.parse().map_err(|_| bad("bad float"))?,
                "r0" => cfg.r0 = value.parse().map_err(|_| bad("bad float"))?,
                "m" => cfg.m = value.parse().map_err(|_| bad("bad integer"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("bad integer"))?,
                "stretch" => {
                    cfg.stretch = value
                        .split(',')
                        .map(|t| t.trim().parse().map_err(|_| bad("bad float")))
                        .collect::<Result<_>>()?;
                }
                "verify_bounds" => {
                    cfg.verify_bounds = match value.as_str() {
                        "true" => true,
                        "false" => false,
                        _ => return Err(bad("expected true or false, got")),
                    };
                }
                "out" => cfg.out_dir = Some(PathBuf::from(value)),
                other => return Err(LabError::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(LabError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(LabError::Config(format!("r0 must be positive, got {}", self.r0)));
        }
        if self.eps >= self.r0 / 4.0 {
            return Err(LabError::Config(format!(
                "need eps < r0 / 4, got eps {} with r0 {}",
                self.eps, self.r0
            )));
        }
        if self.m == 0 {
            return Err(LabError::Config("m must be at least 1".into()));
        }
        match self.tag {
            ExperimentTag::Stability => {
                if self.stretch.is_empty() {
                    return Err(LabError::Config("stability needs a non-empty stretch list".into()));
                }
                for &a in &self.stretch {
                    if !(a > 0.0) || !a.is_finite() {
                        return Err(LabError::Config(format!("bad stretch factor {a}")));
                    }
                }
            }
            _ => {
                if self.sizes.is_empty() {
                    return Err(LabError::Config("size list must be non-empty".into()));
                }
            }
        }
        if self.tag == ExperimentTag::App3 && self.m % 8 != 0 {
            return Err(LabError::Config(format!(
                "app3 carves quarter-width slits; m must be a multiple of 8, got {}",
                self.m
            )));
        }
        if matches!(self.tag, ExperimentTag::App2 | ExperimentTag::App3) {
            for &n in &self.sizes {
                if n < 5 {
                    return Err(LabError::Config(format!(
                        "4-regular generator graphs need at least 5 vertices, got {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-row RNG stream: an FNV-style mix of (seed, tag, size) so rows are
/// schedule-independent and distinct across experiments.
pub fn row_seed(seed: u64, tag: ExperimentTag, size: usize) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for b in tag.as_str().bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    (h ^ size as u64).wrapping_mul(0x0000_0100_0000_01b3)
}

/// One measured surface, in the fixed output schema.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    /// Size label: lattice width, generator order, or 100x the stretch.
    pub l: usize,
    pub sigma2_graph: f64,
    pub sigma2_fem: f64,
    pub boundary_length: f64,
    pub area: f64,
    /// Isoperimetric ratio: boundary length over the square root of area.
    pub isoperimetric_ratio: f64,
    pub genus: usize,
    pub boundary_components: usize,
    /// sigma2_fem / sigma2_graph.
    pub ratio: f64,
    pub sigma2_times_length: f64,
}

/// Everything measured beyond the fixed columns; kept for gates and debugging.
#[derive(Debug, Clone, Serialize)]
pub struct RowDiagnostics {
    pub n_fem_nodes: usize,
    pub fem_dense_path: bool,
    pub fem_residual: f64,
    pub n_net_vertices: usize,
    pub n_net_boundary: usize,
    pub net_max_degree: usize,
    pub graph_residual: f64,
    /// Whether the two-sided net metric bounds held over all vertex pairs;
    /// `None` when the audit was not requested.
    pub bounds_hold: Option<bool>,
    pub bounds_lower_margin: Option<f64>,
    pub bounds_upper_margin: Option<f64>,
    pub bounds_unreachable: Option<usize>,
    /// Laplacian gap of the generator graph (app2/app3 rows).
    pub generator_lambda2: Option<f64>,
    pub sigmas_fem: Vec<f64>,
    pub sigmas_graph: Vec<f64>,
    /// Per-index fem/graph ratios, starting at the second eigenvalue.
    pub sigma_ratios: Vec<f64>,
    /// Stretch factor of a stability row.
    pub stretch: Option<f64>,
    /// Graph eigenvalue ratios against the unstretched base (k >= 2).
    pub stability_ratios: Option<Vec<f64>>,
    /// Conservative admissible window for those ratios.
    pub stability_window: Option<(f64, f64)>,
    pub stability_ok: Option<bool>,
    /// Topological ceiling 8π(genus + 1) the row was gated against.
    pub sigma2_length_ceiling: f64,
}

/// A row slot: either a measurement or the reason it failed.
#[derive(Debug, Clone, Serialize)]
pub struct RowReport {
    pub l: usize,
    pub row: Option<ResultRow>,
    pub diagnostics: Option<RowDiagnostics>,
    pub error: Option<String>,
}

/// A finished run.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub rows: Vec<RowReport>,
}

impl RunOutput {
    /// Successful rows in order.
    pub fn ok_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter_map(|r| r.row.as_ref())
    }

    /// Successful rows with their measurement diagnostics.
    pub fn measured_rows(&self) -> impl Iterator<Item = (&ResultRow, &RowDiagnostics)> {
        self.rows
            .iter()
            .filter_map(|r| Some((r.row.as_ref()?, r.diagnostics.as_ref()?)))
    }

    /// min, max, and max/min of the per-row fem/graph σ₂ ratios.
    pub fn ratio_spread(&self) -> Option<(f64, f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in self.ok_rows() {
            lo = lo.min(row.ratio);
            hi = hi.max(row.ratio);
        }
        (lo.is_finite() && hi.is_finite() && lo > 0.0).then(|| (lo, hi, hi / lo))
    }
}

/// Runs one experiment to completion.  Row failures are recorded in the
/// output; only configuration errors and ceiling violations abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let rows = match cfg.tag {
        ExperimentTag::App1 => pipeline::run_lattice(cfg, 2)?,
        ExperimentTag::Compare => pipeline::run_lattice(cfg, 6)?,
        ExperimentTag::App2 => pipeline::run_flat(cfg, false)?,
        ExperimentTag::App3 => pipeline::run_flat(cfg, true)?,
        ExperimentTag::Stability => pipeline::run_stability(cfg)?,
    };
    Ok(RunOutput { config: cfg.clone(), rows })
}

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "l,sigma2_graph,sigma2_fem,boundary_length,area,\
isoperimetric_ratio,genus,boundary_components,ratio,sigma2_times_length";

/// Renders the successful rows as CSV; floats use shortest round-trip
/// formatting, so identical runs give identical bytes.
pub fn csv_string(out: &RunOutput) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for row in out.ok_rows() {
        s.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?},{},{},{:?},{:?}\n",
            row.l,
            row.sigma2_graph,
            row.sigma2_fem,
            row.boundary_length,
            row.area,
            row.isoperimetric_ratio,
            row.genus,
            row.boundary_components,
            row.ratio,
            row.sigma2_times_length,
        ));
    }
    s
}

/// Full rows-plus-diagnostics JSON document.
pub fn json_string(out: &RunOutput) -> String {
    serde_json::to_string_pretty(out).expect("run serialization cannot fail")
}

/// Run manifest: versions, parameters, per-row status, summary statistics,
/// and wall time.  Timing aside, identical runs give identical manifests.
pub fn manifest_string(out: &RunOutput, wall_seconds: f64) -> String {
    #[derive(Serialize)]
    struct Manifest<'a> {
        tool: &'static str,
        version: &'static str,
        experiment: &'a str,
        parameters: &'a ExperimentConfig,
        gate_policy: &'static str,
        rows_ok: usize,
        rows_failed: usize,
        row_errors: BTreeMap<usize, &'a str>,
        summary: BTreeMap<&'static str, f64>,
        wall_seconds: f64,
    }
    let mut row_errors = BTreeMap::new();
    for r in &out.rows {
        if let Some(e) = &r.error {
            row_errors.insert(r.l, e.as_str());
        }
    }
    let mut summary = BTreeMap::new();
    if let Some((lo, hi, spread)) = out.ratio_spread() {
        summary.insert("ratio_min", lo);
        summary.insert("ratio_max", hi);
        summary.insert("ratio_spread", spread);
    }
    let mut prod_over_l_min = f64::INFINITY;
    for row in out.ok_rows() {
        if row.l > 0 {
            prod_over_l_min = prod_over_l_min.min(row.sigma2_times_length / row.l as f64);
        }
    }
    if prod_over_l_min.is_finite() {
        summary.insert("sigma2_length_over_l_min", prod_over_l_min);
    }
    let manifest = Manifest {
        tool: "steklov-lab",
        version: env!("CARGO_PKG_VERSION"),
        experiment: out.config.tag.as_str(),
        parameters: &out.config,
        gate_policy: "quantitative gates are property-form or calibrated \
                      regression brackets, not book constants",
        rows_ok: out.ok_rows().count(),
        rows_failed: out.rows.iter().filter(|r| r.error.is_some()).count(),
        row_errors,
        summary,
        wall_seconds,
    };
    serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail")
}

/// Runs an experiment and persists CSV or JSON plus the manifest into
/// `dir`.  Returns the paths written.
pub fn run_to_directory(
    cfg: &ExperimentConfig,
    dir: &Path,
    json_format: bool,
) -> Result<(RunOutput, Vec<PathBuf>)> {
    let start = Instant::now();
    let out = run_experiment(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let data_path = if json_format {
        dir.join(format!("{}.json", cfg.tag))
    } else {
        dir.join(format!("{}.csv", cfg.tag))
    };
    let body = if json_format { json_string(&out) } else { csv_string(&out) };
    std::fs::write(&data_path, body)?;
    written.push(data_path);
    let manifest_path = dir.join("manifest.json");
    std::fs::write(&manifest_path, manifest_string(&out, wall))?;
    written.push(manifest_path);
    Ok((out, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parse_overrides_defaults() {
        let text = "\
# a small run
experiment = app1
sizes = 2, 3
eps = 0.2
m = 4
seed = 11
";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(cfg.tag, ExperimentTag::App1);
        assert_eq!(cfg.sizes, vec![2, 3]);
        assert_eq!(cfg.eps, 0.2);
        assert_eq!(cfg.m, 4);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.r0, DEFAULT_R0);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(ExperimentConfig::from_text("sizes = 2").is_err());
        assert!(ExperimentConfig::from_text("experiment = nope").is_err());
        assert!(ExperimentConfig::from_text("experiment = app1\nwat = 3").is_err());
        // Spacing must stay under a quarter of the flatness radius.
        assert!(ExperimentConfig::from_text("experiment = app1\neps = 0.3").is_err());
        // Carved surfaces need slit-aligned meshes.
        assert!(ExperimentConfig::from_text("experiment = app3\nm = 4").is_err());
        // Generator graphs must support 4-regularity.
        assert!(ExperimentConfig::from_text("experiment = app2\nsizes = 3").is_err());
        let mut cfg = ExperimentConfig::default_for(ExperimentTag::Stability);
        cfg.stretch.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tags_round_trip_and_seeds_differ() {
        for tag in ExperimentTag::all() {
            assert_eq!(tag.as_str().parse::<ExperimentTag>().unwrap(), tag);
        }
        let a = row_seed(7, ExperimentTag::App1, 3);
        assert_eq!(a, row_seed(7, ExperimentTag::App1, 3));
        assert_ne!(a, row_seed(7, ExperimentTag::App2, 3));
        assert_ne!(a, row_seed(7, ExperimentTag::App1, 4));
        assert_ne!(a, row_seed(8, ExperimentTag::App1, 3));
    }

    #[test]
    fn one_hole_lattice_row_measures_the_annulus() {
        let mut cfg = ExperimentConfig::default_for(ExperimentTag::App1);
        cfg.sizes = vec![1];
        cfg.verify_bounds = true;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        let (row, diag) = out.measured_rows().next().expect("row should succeed");
        // One hole: a disk with a square puncture, collar on both circles.
        assert_eq!(row.genus, 0);
        assert_eq!(row.boundary_components, 2);
        assert_eq!(row.area, 36.0);
        assert_eq!(row.boundary_length, 24.0);
        assert_eq!(row.isoperimetric_ratio, 4.0);
        assert!(row.sigma2_fem > 0.0 && row.sigma2_graph > 0.0);
        assert!(row.ratio.is_finite() && row.ratio > 0.0);
        assert!(row.sigma2_times_length <= diag.sigma2_length_ceiling);
        // 24 length units of boundary at spacing 1/4.
        assert_eq!(diag.n_net_boundary, 96);
        assert!(diag.n_net_vertices > 2 * 96);
        // The audit walked every pair.
        assert_eq!(diag.bounds_hold, Some(true));
        assert_eq!(diag.bounds_unreachable, Some(0));
        assert!(diag.bounds_lower_margin.unwrap() >= 0.0);
        assert!(diag.bounds_upper_margin.unwrap() >= 0.0);
        let text = csv_string(&out);
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.lines().nth(1).unwrap().starts_with("1,"));
    }

    #[test]
    fn stability_rows_track_the_stretch() {
        let mut cfg = ExperimentConfig::default_for(ExperimentTag::Stability);
        cfg.stretch = vec![1.0, 1.2];
        let out = run_experiment(&cfg).unwrap();
        let rows: Vec<_> = out.measured_rows().collect();
        assert_eq!(rows.len(), 2);

        let (base_row, base_diag) = &rows[0];
        assert_eq!(base_row.l, 100);
        assert_eq!(base_row.genus, 0);
        assert_eq!(base_row.boundary_components, 2);
        // Unstretched row is its own baseline, bit for bit.
        for r in base_diag.stability_ratios.as_ref().unwrap() {
            assert_eq!(*r, 1.0);
        }
        assert_eq!(base_diag.stability_ok, Some(true));

        let (row, diag) = &rows[1];
        assert_eq!(row.l, 120);
        assert_eq!(row.boundary_components, 2);
        // Stretching the circumference by 1.2 scales the boundary length.
        assert!((row.boundary_length - 1.2 * base_row.boundary_length).abs() < 1e-12);
        let (lo, hi) = diag.stability_window.unwrap();
        assert!(lo < 1.0 && hi > 1.0);
        for r in diag.stability_ratios.as_ref().unwrap() {
            assert!(*r > lo && *r < hi, "ratio {r} outside ({lo}, {hi})");
        }
        assert_eq!(diag.stability_ok, Some(true));

        // Same config, same bytes.
        let again = run_experiment(&cfg).unwrap();
        assert_eq!(csv_string(&again), csv_string(&out));
    }

    #[test]
    fn flat_surface_row_records_generator_gap() {
        let mut cfg = ExperimentConfig::default_for(ExperimentTag::App2);
        cfg.sizes = vec![5];
        let out = run_experiment(&cfg).unwrap();
        let (row, diag) = out.measured_rows().next().expect("row should succeed");
        // Nine unit squares per generator vertex plus a unit collar on each
        // of the five length-4 boundary circles.
        assert_eq!(row.genus, 6);
        assert_eq!(row.boundary_components, 5);
        assert_eq!(row.area, 65.0);
        assert_eq!(row.boundary_length, 20.0);
        assert!(diag.generator_lambda2.unwrap() > 0.0);
        assert!(row.sigma2_times_length <= diag.sigma2_length_ceiling);
    }

    #[test]
    fn csv_has_fixed_schema_and_stable_floats() {
        let row = ResultRow {
            l: 2,
            sigma2_graph: 0.125,
            sigma2_fem: 0.1,
            boundary_length: 36.0,
            area: 33.0,
            isoperimetric_ratio: 36.0 / 33f64.sqrt(),
            genus: 0,
            boundary_components: 5,
            ratio: 0.8,
            sigma2_times_length: 3.6,
        };
        let out = RunOutput {
            config: ExperimentConfig::default_for(ExperimentTag::App1),
            rows: vec![RowReport { l: 2, row: Some(row), diagnostics: None, error: None }],
        };
        // One diagnostics-free row renders, errored rows are skipped.
        let text = csv_string(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let data = lines.next().unwrap();
        assert!(data.starts_with("2,0.125,0.1,36.0,33.0,"));
        assert_eq!(data.split(',').count(), 10);
        assert_eq!(csv_string(&out), text);
    }
}
