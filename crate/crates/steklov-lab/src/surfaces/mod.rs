//! Square complexes, their triangle meshes, and the three surface families
//! used throughout the crate.
//!
//! A surface is described combinatorially as a [`PieceComplex`]: a set of
//! unit squares with side identifications, grouped into "pieces" (one piece
//! per graph or lattice vertex).  [`complex_to_mesh`] turns a complex into a
//! conforming triangle mesh ([`FemMesh`]) at a chosen subdivision, computing
//! the identification classes, the oriented boundary walks, and enough
//! metadata to assemble finite elements on it later.
//!
//! The three builders are:
//!
//! * [`build_lattice_domain`] — a planar puzzle of cross-shaped pieces over
//!   the (l+1) x (l+1) grid lattice; an annulus-with-holes domain whose
//!   isoperimetric ratio grows with `l`;
//! * [`build_flat_surface`] — one two-sheet (doubled) cross per vertex of a
//!   4-regular graph, all ports glued along the edges; genus l+1 with one
//!   boundary circle per vertex;
//! * [`build_connected_boundary_surface`] — the doubled construction with
//!   slits carved along a spanning tree so the entire boundary becomes a
//!   single closed curve.

mod builders;
mod complex;
mod mesh;

pub use builders::{
    build_connected_boundary_surface, build_flat_surface, build_lattice_domain, maximal_tree,
};
pub use complex::{CarveRect, Gluing, PieceComplex, PieceKind, Port, Side, SideRef, Span};
pub use mesh::{
    attach_collar, boundary_components, complex_to_mesh, euler_genus, write_mesh, BoundaryEdge,
    Cell, FemMesh,
};
pub(crate) use mesh::trace_boundary;

use thiserror::Error;

/// Errors from complex construction and meshing.
#[derive(Debug, Error)]
pub enum SurfaceError {
    /// Structurally invalid input.
    #[error("invalid input: {0}")]
    BadInput(String),
    /// A builder requiring a 4-regular graph received something else.
    #[error("vertex {vertex} has degree {degree}, need 4")]
    NotFourRegular { vertex: usize, degree: usize },
    /// The input graph is not connected.
    #[error("graph is not connected")]
    Disconnected,
    /// The supplied edge set is not a spanning tree of the graph.
    #[error("not a spanning tree: {0}")]
    TreeMismatch(String),
    /// Subdivision count incompatible with the complex.
    #[error("bad subdivision {resolution}: {reason}")]
    BadResolution { resolution: usize, reason: String },
    /// Two cells traverse a shared edge in the same direction, so the glued
    /// surface is not orientable as specified.
    #[error("inconsistent gluing orientation between squares {square_a} and {square_b}")]
    GluingOrientation { square_a: u32, square_b: u32 },
    /// An edge with three or more incident cells, or a branching boundary
    /// vertex.
    #[error("non-manifold identification: {0}")]
    NonManifold(String),
    /// A cell whose corners collapse under identification.
    #[error("cell ({x}, {y}) of square {square} has identified corners")]
    DegenerateCell { square: u32, x: usize, y: usize },
    /// Derived invariants (integer genus, closed walks) failed.
    #[error("inconsistent topology: {0}")]
    InvalidTopology(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, SurfaceError>;
