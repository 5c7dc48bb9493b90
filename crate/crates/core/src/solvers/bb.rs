use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{check_inputs, deflate_matrix, deflation_residual, ColumnReport, ExitReason, PrunedNode, SolverReport};
use crate::combiner::{CombinerMatrix, PhaseAlphabet, PrefixBounds};
use crate::error::Result;
use crate::numerics::{herm_eig, rayleigh_quotient, ComplexMatrix, C64};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbOptions {
    /// Relative optimality gap `ε ≥ 0`; zero searches to exactness.
    pub epsilon: f64,
    /// Maximum node expansions per column.
    pub node_budget: usize,
    /// Tighten bounds with the quantization-aware estimate. The estimate is
    /// not a true bound, so columns found this way are not certified.
    pub corollary1_bound: bool,
    /// Record every pruned prefix in the column reports.
    pub trace_pruning: bool,
}

impl Default for BbOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            node_budget: DEFAULT_NODE_BUDGET,
            corollary1_bound: false,
            trace_pruning: false,
        }
    }
}

struct Node {
    bound: f64,
    seq: u64,
    prefix: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap on bound; among equal bounds the earlier insertion wins
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    indices: Vec<usize>,
    value: f64,
    trajectory: Vec<f64>,
}

impl Incumbent {
    fn offer(&mut self, indices: Vec<usize>, value: f64) {
        if value > self.value {
            self.indices = indices;
            self.value = value;
            self.trajectory.push(value);
        }
    }
}

/// Best-first branch and bound over the phase alphabet, one column at a time
/// with deflation in between.
pub fn bb_bc(
    r: impl AsRef<ComplexMatrix>,
    k: usize,
    alphabet: &PhaseAlphabet,
    opts: &BbOptions,
) -> Result<(CombinerMatrix, SolverReport)> {
    let r = r.as_ref();
    let l = check_inputs(r, k)?;
    if !(opts.epsilon >= 0.0) || !opts.epsilon.is_finite() {
        return Err(crate::Error::Input(format!(
            "epsilon must be a non-negative number, got {}",
            opts.epsilon
        )));
    }
    let mut combiner = CombinerMatrix::empty(alphabet.clone(), l);
    let mut report = SolverReport::default();
    let mut r_b = r.clone();
    for _ in 0..k {
        let start = Instant::now();
        let mut col = search_column(&r_b, alphabet, opts)?;
        combiner.push(std::mem::take(&mut col.indices));
        let a_c = combiner.matrix();
        r_b = deflate_matrix(&r_b, &a_c);
        col.report.deflation_residual = deflation_residual(&r_b, &a_c);
        col.report.wall_time = start.elapsed();
        report.columns.push(col.report);
    }
    report.finish(&combiner, r);
    Ok((combiner, report))
}

struct ColumnOutcome {
    indices: Vec<usize>,
    report: ColumnReport,
}

fn search_column(r_b: &ComplexMatrix, alphabet: &PhaseAlphabet, opts: &BbOptions) -> Result<ColumnOutcome> {
    let l = r_b.rows();
    let q = alphabet.size();
    let value = |idx: &[usize]| rayleigh_quotient(r_b, alphabet.vector(idx).as_slice());

    // initial incumbent: dominant eigenvector rounded onto the alphabet
    let eig = herm_eig(r_b)?;
    let mut start = alphabet.round_indices(eig.vector(0).as_slice());
    alphabet.normalize_rotation(&mut start);
    let v0 = value(&start);
    let mut inc = Incumbent {
        indices: start,
        value: v0,
        trajectory: vec![v0],
    };

    let mut expanded = 0usize;
    let mut pruned = 0usize;
    let mut evaluations = 0usize;
    let mut exit = ExitReason::Exhausted;
    let mut frontier_bound = None;
    let mut log = Vec::new();
    let mut prune = |prefix: &[usize], bound: f64, incumbent: f64| {
        pruned += 1;
        if opts.trace_pruning {
            log.push(PrunedNode {
                prefix: prefix.to_vec(),
                bound,
                incumbent,
            });
        }
    };

    if l > 1 {
        let bounds = PrefixBounds::new(r_b)?;
        let mut seq = 0u64;
        let mut heap = BinaryHeap::new();
        let bound_of = |prefix: &[usize], evaluations: &mut usize| -> Result<(f64, Vec<C64>)> {
            *evaluations += 1;
            let fixed: Vec<C64> = prefix.iter().map(|&n| alphabet.element(n)).collect();
            let sol = bounds.solve(&fixed)?;
            let mut b = sol.lambda_star;
            if opts.corollary1_bound {
                if let Some(a) = bounds.approx(&fixed, &sol, alphabet.bits()) {
                    b = b.min(a);
                }
            }
            let mut full = fixed;
            full.extend(sol.direction(l - prefix.len()).0);
            Ok((b, full))
        };

        let root = vec![0usize];
        let (root_bound, _) = bound_of(&root, &mut evaluations)?;
        if root_bound > inc.value {
            heap.push(Node {
                bound: root_bound,
                seq,
                prefix: root,
            });
            seq += 1;
        } else {
            prune(&root, root_bound, inc.value);
        }

        while let Some(top) = heap.peek() {
            if top.bound <= inc.value {
                let node = heap.pop().expect("peeked");
                prune(&node.prefix, node.bound, inc.value);
                continue;
            }
            if top.bound - inc.value < opts.epsilon * inc.value {
                exit = ExitReason::EpsilonGap;
                frontier_bound = Some(top.bound);
                break;
            }
            if expanded >= opts.node_budget {
                exit = ExitReason::Budget;
                frontier_bound = Some(top.bound);
                break;
            }
            let node = heap.pop().expect("peeked");
            expanded += 1;
            for psi in 0..q {
                let mut child = Vec::with_capacity(node.prefix.len() + 1);
                child.extend_from_slice(&node.prefix);
                child.push(psi);
                if child.len() == l {
                    evaluations += 1;
                    let v = value(&child);
                    if v > inc.value {
                        inc.offer(child, v);
                    } else {
                        prune(&child, v, inc.value);
                    }
                    continue;
                }
                let (b, relaxed) = bound_of(&child, &mut evaluations)?;
                if b > inc.value {
                    let rounded = alphabet.round_indices(&relaxed);
                    let v = value(&rounded);
                    inc.offer(rounded, v);
                    heap.push(Node {
                        bound: b,
                        seq,
                        prefix: child,
                    });
                    seq += 1;
                } else {
                    prune(&child, b, inc.value);
                }
            }
        }
    }

    let certified = exit != ExitReason::Budget && !opts.corollary1_bound;
    Ok(ColumnOutcome {
        indices: inc.indices,
        report: ColumnReport {
            trajectory: inc.trajectory,
            nodes_expanded: expanded,
            nodes_pruned: pruned,
            bound_evaluations: evaluations,
            wall_time: Default::default(),
            epsilon_used: opts.epsilon,
            exit,
            certified,
            rayleigh_quotient: inc.value,
            deflation_residual: 0.0,
            frontier_bound,
            pruned: log,
        },
    })
}
