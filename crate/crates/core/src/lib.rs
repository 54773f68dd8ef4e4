//! Internal diffusion-limited aggregation with uniform starting points
//! (uIDLA) on `Z^d`, together with the processes, couplings and estimators
//! used to compare it against standard IDLA and the Euclidean ball.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod couplings;
pub mod error;
pub mod genealogy;
pub mod harness;
pub mod lattice;
pub mod par;
pub mod processes;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{Aggregate, Dim, LatticePoint};
