//! Numerical CR geometry of real hypersurfaces in C^2.
//!
//! The crate computes the 6th-order umbilical tensor of a strictly
//! pseudoconvex hypersurface `M = {rho = 0}` through the determinant of the
//! 5x5 matrix built from jets of the defining function, normalizes it by the
//! complex Monge-Ampere determinant into the relative invariant `Q`, scans
//! and traces the umbilical locus `{Q = 0}`, computes winding-number
//! umbilical indices of closed curves, and carries an exact polynomial
//! calculus for perturbations of the unit sphere (bidegree decomposition,
//! the operator `Q0`, and Argument-Principle winding counts in blow-up
//! coordinates).

pub mod cli;
pub mod error;
pub mod index;
pub mod jets;
pub mod locus;
pub mod perturb;
pub mod poly;
pub mod surfaces;
pub mod tensor;

pub use error::{Error, JetError, Result};
pub use jets::{Jet, Var, MAX_ORDER};
