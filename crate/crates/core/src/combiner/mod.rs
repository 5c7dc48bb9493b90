//! Efficiency metric, unconstrained optimum, the partially-fixed Rayleigh
//! quotient sub-problem and phase-alphabet rounding.

mod alphabet;
mod efficiency;
mod subproblem;

pub use alphabet::{round_to_alphabet, CombinerMatrix, PhaseAlphabet, MAX_BITS};
pub use efficiency::{efficiency, optimal_unconstrained, orthonormal_columns, UnconstrainedOptimum};
pub use subproblem::{
    approx_discrete_bound, solve_subproblem, Completion, PrefixBounds, SubproblemCase, SubproblemInstance,
    SubproblemSolution, TOL_Q,
};
