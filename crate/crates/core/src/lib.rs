//! Discrete conformal maps on acute triangular lattices.
//!
//! A numerical laboratory around discrete conformal equivalence of triangle
//! meshes: it carves simply connected pieces of a scaled triangular lattice,
//! solves the Dirichlet problem for the logarithmic scale factors, lays out
//! the resulting piecewise-linear map, computes the discrete Schwarzians of
//! the map together with the algebraic identities they satisfy, and measures
//! convergence of scale factors, maps and Schwarzians toward their smooth
//! counterparts.
//!
//! Modules:
//! - [`lattice`]: lattice geometry and carving of subcomplexes
//! - [`calculus`]: discrete directional derivatives, cot-Laplacian, regularity bound
//! - [`solver`]: Dirichlet solver for scale factors and breadth-first layout
//! - [`schwarzian`]: cross-ratios, discrete Schwarzians, flower identities
//! - [`mobius`]: Möbius algebra and contact transformations
//! - [`analytic`]: smooth reference functions with closed-form Schwarzians
//! - [`harness`]: experiment orchestration, convergence-order fits, reports

pub mod analytic;
pub mod calculus;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod mobius;
pub mod schwarzian;
pub mod solver;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;
