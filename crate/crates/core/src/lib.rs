//! Newton and quasi-Newton methods for convex-composite problems `min h(c(x))`
//! with `h` piecewise linear-quadratic (PLQ) and `c` smooth.
//!
//! The crate bundles the PLQ calculus, multiplier and constraint-qualification
//! checks, active-manifold data, second-order certificates, and the local solvers.

pub mod benchmarks;
pub mod calculus;
pub mod catalog;
pub mod certify;
pub mod composite;
pub mod error;
pub mod expr;
pub mod ext;
pub mod harness;
pub mod linalg;
pub mod lp;
pub mod manifold;
pub mod plq;
pub mod polyhedron;
pub mod solver;

pub use error::{Error, Result};
pub use ext::ExtReal;
