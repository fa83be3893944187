//! Flag-algebra toolkit for lower bounds on monochromatic clique densities.
//!
//! The pipeline enumerates small graphs, computes exact flag densities,
//! assembles a block-diagonal semidefinite program, solves it numerically,
//! rounds the solution to rationals and verifies the resulting certificate
//! with exact arithmetic.

pub mod algebra;
pub mod certify;
pub mod densities;
pub mod flags;
pub mod graphs;
pub mod rational;
pub mod sdp;

pub use flags::{Flag, FlagError, FlagKey, FlagSpace, TypeSigma};
pub use graphs::{enumerate_graphs, CanonicalKey, Graph, GraphError};
pub use rational::{Rational, RationalMatrix};
