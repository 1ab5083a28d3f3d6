//! Sampling a surface and condensing it to a graph with boundary.
//!
//! The pipeline has two halves.  A [`SampledDomain`] is a fine point cloud
//! over a meshed surface together with a weighted background graph whose
//! shortest paths stand in for geodesic distances; it also retains the
//! boundary circles and the collar's ring structure.  From such a domain,
//! [`build_discretization`] extracts a coarse [`crate::graphs::BoundaryGraph`]:
//! a maximal `eps`-separated net on the boundary, a copy of it pushed to
//! depth `4 eps` into the collar, a maximal `eps`-separated net over the
//! rest of the surface, and edges between all vertices closer than
//! `3 eps`, plus one mandated edge from each boundary vertex to its collar
//! copy.  [`discretize_function`] averages a sample function over `3 eps`
//! balls to produce a vertex function on that graph.

mod build;
mod domain;

pub use build::{
    build_discretization, discretize_function, maximal_separated_set, Discretization,
    DiscretizationParams, DIMENSION,
};
pub use domain::{SampledDomain, SamplePoint};

use thiserror::Error;

use crate::graphs::GraphError;

/// Errors from domain sampling and discretization.
#[derive(Debug, Error)]
pub enum DiscretizeError {
    /// Structurally invalid input.
    #[error("invalid input: {0}")]
    BadInput(String),
    /// Parameters outside their admissible range.
    #[error("invalid parameters: {0}")]
    BadParams(String),
    /// The background graph does not connect all sample points.
    #[error("background graph disconnected: point {0} unreachable")]
    Disconnected(usize),
    /// The domain's collar cannot host the depth-`4 eps` net copy.
    #[error("collar depth {available} is shallower than the required {needed}")]
    CollarTooShallow { needed: f64, available: f64 },
    /// An averaging ball captured no sample points.
    #[error("empty averaging ball at vertex {0}")]
    EmptyBall(usize),
    /// A computed output violated one of the construction's invariants.
    #[error("construction inconsistency: {0}")]
    Inconsistent(String),
    /// Propagated graph-construction failure.
    #[error(transparent)]
    Graph(#[from] GraphError),
    /// Serialization I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, DiscretizeError>;
