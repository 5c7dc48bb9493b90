use std::time::Instant;

use super::{check_inputs, deflate_matrix, deflation_residual, ColumnReport, ExitReason, SolverReport};
use crate::combiner::{CombinerMatrix, PhaseAlphabet};
use crate::error::{Error, Result};
use crate::numerics::{rayleigh_quotient, ComplexMatrix};

/// Largest `B·(L−1)` that [`exhaustive`] will enumerate.
pub const EXHAUSTIVE_BIT_LIMIT: u32 = 24;

/// Per-column enumeration of `Ψ^{L−1}` (first entry fixed). Candidates
/// within a few ulps of the best count as ties and the lexicographically
/// first one is kept.
pub fn exhaustive(
    r: impl AsRef<ComplexMatrix>,
    k: usize,
    alphabet: &PhaseAlphabet,
) -> Result<(CombinerMatrix, SolverReport)> {
    let r = r.as_ref();
    let l = check_inputs(r, k)?;
    let bits = alphabet.bits() * (l as u32 - 1);
    if bits > EXHAUSTIVE_BIT_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            bits: bits as usize,
            limit: EXHAUSTIVE_BIT_LIMIT as usize,
        });
    }
    let mut combiner = CombinerMatrix::empty(alphabet.clone(), l);
    let mut report = SolverReport::default();
    let mut r_b = r.clone();
    for _ in 0..k {
        let start = Instant::now();
        let (indices, value, count) = enumerate(&r_b, alphabet);
        combiner.push(indices);
        let a_c = combiner.matrix();
        r_b = deflate_matrix(&r_b, &a_c);
        report.columns.push(ColumnReport {
            trajectory: vec![value],
            nodes_expanded: count,
            nodes_pruned: 0,
            bound_evaluations: count,
            wall_time: start.elapsed(),
            epsilon_used: 0.0,
            exit: ExitReason::Direct,
            certified: true,
            rayleigh_quotient: value,
            deflation_residual: deflation_residual(&r_b, &a_c),
            frontier_bound: None,
            pruned: Vec::new(),
        });
    }
    report.finish(&combiner, r);
    Ok((combiner, report))
}

fn enumerate(r_b: &ComplexMatrix, alphabet: &PhaseAlphabet) -> (Vec<usize>, f64, usize) {
    let l = r_b.rows();
    let q = alphabet.size();
    let mut idx = vec![0usize; l];
    let mut x = alphabet.vector(&idx).0;
    let mut best_idx = idx.clone();
    let mut best = rayleigh_quotient(r_b, &x);
    let mut count = 1;
    loop {
        // odometer with the last entry varying fastest
        let mut pos = l;
        loop {
            if pos == 1 {
                return (best_idx, best, count);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < q {
                x[pos] = alphabet.element(idx[pos]);
                break;
            }
            idx[pos] = 0;
            x[pos] = alphabet.element(0);
        }
        count += 1;
        let v = rayleigh_quotient(r_b, &x);
        if v > best + 1e-14 * best.abs() {
            best = v;
            best_idx.copy_from_slice(&idx);
        }
    }
}
