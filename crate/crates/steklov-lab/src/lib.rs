//! Spectral laboratory for Steklov eigenvalue problems on graphs with
//! boundary and on piecewise-flat surfaces.
//!
//! The crate is organised bottom-up:
//!
//! | module       | provides                                                      |
//! |--------------|---------------------------------------------------------------|
//! | [`numkit`]   | dense/sparse symmetric kernels: eigensolver, SPD solve, Schur |
//! | [`graphs`]   | graphs with boundary, Laplacians, energies, generators        |
//! | [`steklov`]  | discrete Dirichlet-to-Neumann maps and Steklov spectra        |
//! | [`metrics`]  | finite metric spaces and rough-isometry verification          |
//! | [`surfaces`] | unit-square piece complexes, meshing, topology                |
//! | [`discretize`] | sampled domains and graph discretizations of surfaces       |
//! | [`continuum`] | P1 finite-element Steklov solves and analytic cylinders      |
//! | [`lab`]      | experiment harness, persistence, reproducibility              |
//!
//! Nothing here depends on an external linear-algebra stack; the kernels in
//! [`numkit`] are self-contained and every higher layer is checked against
//! independent oracles in the test suite.

pub mod continuum;
pub mod discretize;
pub mod graphs;
pub mod lab;
pub mod metrics;
pub mod numkit;
pub mod steklov;
pub mod surfaces;
