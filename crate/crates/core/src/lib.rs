//! Numerics for spacelike convex graphs in Minkowski 3-space, their Gauss maps to
//! the hyperbolic plane, and the Legendre duality describing the Gauss image.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod chart;
pub mod convergence;
pub mod error;
pub mod frames;
pub mod graphs;
pub mod harmonic;
pub mod legendre;
pub mod lorentz;
pub mod spatial;

pub use error::{GeometryError, Result};
