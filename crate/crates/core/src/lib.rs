//! Discrete beam combination for beamspace massive-MIMO receivers.
//!
//! The crate computes unit-modulus, finite-resolution beam-combination
//! weights that compress a selected set of DFT beams onto fewer RF chains,
//! and measures how much received signal power survives the compression.
//!
//! * [`numerics`]: complex matrices, Jacobi eigensolver, secular equation.
//! * [`channel`]: ray-based multipath channels and their correlation matrices.
//! * [`beamspace`]: DFT beamspace operator, beam selection, leakage.
//! * [`combiner`]: efficiency metric, unconstrained optimum, the partial-fixed
//!   Rayleigh quotient sub-problem and phase rounding.
//! * [`solvers`]: branch-and-bound, sequential greedy and exhaustive search.
//! * [`harness`]: seeded Monte Carlo experiments, reports and self-test.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamspace;
pub mod channel;
pub mod combiner;
mod error;
pub mod harness;
pub mod numerics;
pub mod solvers;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, ComplexVector, C64};
