//! Complex linear algebra, Hermitian eigendecomposition and the secular
//! equation solver.

mod eig;
mod matrix;
mod secular;

pub use eig::{herm_eig, HermEig};
pub use matrix::{rayleigh_quotient, ComplexMatrix, ComplexVector, C64};
pub use secular::{dominant_multiplicity, solve_secular, SecularProblem, POLE_CLUSTER_TOL};
