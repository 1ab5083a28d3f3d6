//! Command-line front end: print the boundary spectrum of a stored graph,
//! build the ε-net of a sampled domain, or run one of the experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use steklov_lab::discretize::{build_discretization, DiscretizationParams, SampledDomain};
use steklov_lab::graphs::BoundaryGraph;
use steklov_lab::lab::{self, ExperimentConfig, ExperimentTag};
use steklov_lab::steklov::steklov_spectrum;

#[derive(Parser)]
#[command(
    name = "steklov-lab",
    version,
    about = "Boundary spectra of graphs and sampled surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the boundary spectrum of a graph stored as JSON.
    Spectrum {
        /// Graph file, in the format written by the graph tooling.
        graph: PathBuf,
    },
    /// Build the ε-net graph of a sampled-domain file; prints the graph as
    /// JSON on stdout and a short summary on stderr.
    Discretize {
        /// Domain file in the `sampled-domain v1` text format.
        domain: PathBuf,
        /// Net spacing ε.
        #[arg(long)]
        eps: f64,
        /// Flatness radius; defaults to 4.2 times the spacing.
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Run one experiment; writes the result table and a manifest, and
    /// prints the table on stdout.
    Experiment {
        /// One of app1 | app2 | app3 | compare | stability.
        tag: String,
        /// Flat `key = value` config file; defaults to the tag's stock
        /// setup.  Its `experiment` key must match the tag.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to `runs/<tag>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format written to disk: csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Spectrum { graph } => {
            let text = std::fs::read_to_string(&graph)?;
            let g = BoundaryGraph::from_json(&text)?;
            let spectrum = steklov_spectrum(&g)?;
            println!("{}", spectrum.to_json());
        }
        Command::Discretize { domain, eps, r0 } => {
            let text = std::fs::read_to_string(&domain)?;
            let dom = SampledDomain::read_text(&text)?;
            let params = match r0 {
                Some(r) => DiscretizationParams::new(eps, r, 0.0)?,
                None => DiscretizationParams::flat(eps)?,
            };
            let disc = build_discretization(&dom, &params, None)?;
            eprintln!(
                "net: {} vertices ({} boundary), {} edges, max degree {}",
                disc.graph.n_vertices(),
                disc.graph.n_boundary(),
                disc.graph.n_edges(),
                disc.graph.max_degree()
            );
            println!("{}", disc.graph.to_json());
        }
        Command::Experiment { tag, config, seed, out, format } => {
            let tag: ExperimentTag = tag.parse()?;
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    let cfg = ExperimentConfig::from_text(&text)?;
                    if cfg.tag != tag {
                        return Err(format!(
                            "config file is for `{}` but the command asked for `{tag}`",
                            cfg.tag
                        )
                        .into());
                    }
                    cfg
                }
                None => ExperimentConfig::default_for(tag),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = out {
                cfg.out_dir = Some(dir);
            }
            let json = match format.as_str() {
                "csv" => false,
                "json" => true,
                other => return Err(format!("unknown format `{other}`").into()),
            };
            let dir = cfg
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("runs").join(tag.as_str()));
            let (run, written) = lab::run_to_directory(&cfg, &dir, json)?;
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            for report in &run.rows {
                if let Some(err) = &report.error {
                    eprintln!("row {} failed: {err}", report.l);
                }
            }
            print!("{}", lab::csv_string(&run));
        }
    }
    Ok(())
}
