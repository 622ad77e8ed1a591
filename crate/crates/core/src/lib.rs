//! Dynamic optimal transport between discrete densities on planar meshes.
//!
//! The Benamou–Brenier problem is discretized with two-point flux
//! approximation finite volumes, optionally on a pair of nested meshes (the
//! density on a coarse triangulation, the potential on its subdivision into
//! quadrilaterals), and solved with a primal-dual logarithmic barrier method.
//!
//! Module map:
//! - [`mesh`]: admissible meshes, generators, nested pairs, file format.
//! - [`ops`]: discrete spaces, divergence/gradient, reconstructions, injection.
//! - [`problem`]: discrete action, constraints, optimality residuals, distance.
//! - [`solver`]: Newton steps and the barrier continuation loop.
//! - [`analysis`]: reference cases, error metrics, convergence studies.
//! - [`cli`]: the `wassersolve` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mesh;
pub mod ops;
pub mod problem;
pub mod solver;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
