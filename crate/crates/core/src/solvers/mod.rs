//! Column-sequential discrete beam-combination solvers.
//!
//! All three solvers build the combiner one column at a time. Each column
//! maximizes the Rayleigh quotient of the working CCM over `Ψ^L` with the
//! first entry fixed to `ψ_0` (the quotient ignores a global phase), and the
//! working CCM is deflated against the columns chosen so far before the next
//! column is searched.

mod bb;
mod deflate;
mod exhaustive;
mod greedy;

use std::time::Duration;

use serde::Serialize;

pub use bb::{bb_bc, BbOptions, DEFAULT_NODE_BUDGET};
pub use deflate::{deflate, deflate_matrix, deflation_residual};
pub use exhaustive::{exhaustive, EXHAUSTIVE_BIT_LIMIT};
pub use greedy::sg_bc;

use crate::combiner::{efficiency, CombinerMatrix};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitReason {
    /// Every branch was resolved.
    Exhausted,
    /// The remaining bounds were within `ε` of the incumbent.
    EpsilonGap,
    /// The node budget ran out; the column is heuristic.
    Budget,
    /// Non-branching solver (greedy or enumeration).
    Direct,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnReport {
    /// Incumbent value after each improvement, starting from the initial one.
    pub trajectory: Vec<f64>,
    pub nodes_expanded: usize,
    pub nodes_pruned: usize,
    pub bound_evaluations: usize,
    pub wall_time: Duration,
    pub epsilon_used: f64,
    pub exit: ExitReason,
    /// The column carries an optimality certificate (exact or within `ε`).
    pub certified: bool,
    /// Rayleigh quotient of the column on the working CCM it was chosen from.
    pub rayleigh_quotient: f64,
    /// Largest `‖R_b w‖` over earlier columns `w` after this column's deflation.
    pub deflation_residual: f64,
    /// Largest bound still open when the search stopped early.
    pub frontier_bound: Option<f64>,
    /// Pruned prefixes, recorded only when requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pruned: Vec<PrunedNode>,
}

/// A prefix discarded by the search, with its bound (or value, for a full
/// vector) and the incumbent it lost to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrunedNode {
    pub prefix: Vec<usize>,
    pub bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverReport {
    pub columns: Vec<ColumnReport>,
    /// Efficiency of the full combiner against the trace of the input CCM.
    pub final_efficiency: Option<f64>,
}

impl SolverReport {
    pub fn nodes_expanded(&self) -> usize {
        self.columns.iter().map(|c| c.nodes_expanded).sum()
    }

    /// Nodes spent on the first `k` columns.
    pub fn nodes_for(&self, k: usize) -> usize {
        self.columns.iter().take(k).map(|c| c.nodes_expanded).sum()
    }

    pub fn certified(&self) -> bool {
        self.columns.iter().all(|c| c.certified)
    }

    pub fn wall_time(&self) -> Duration {
        self.columns.iter().map(|c| c.wall_time).sum()
    }

    pub(crate) fn finish(&mut self, combiner: &CombinerMatrix, r: &ComplexMatrix) {
        let total = r.trace_re();
        self.final_efficiency = efficiency(&combiner.matrix(), r, total).ok();
    }
}

pub(crate) fn check_inputs(r: &ComplexMatrix, k: usize) -> Result<usize> {
    if !r.is_square() {
        return Err(Error::Dimension("CCM must be square".into()));
    }
    if !r.is_finite() {
        return Err(Error::NonFinite);
    }
    if !r.is_hermitian(1e-10) {
        return Err(Error::Input("CCM is not Hermitian".into()));
    }
    let l = r.rows();
    if l == 0 {
        return Err(Error::Dimension("empty CCM".into()));
    }
    if k == 0 || k > l {
        return Err(Error::Input(format!("need 1 ≤ K ≤ L = {l}, got K = {k}")));
    }
    Ok(l)
}
