use std::time::Instant;

use super::{check_inputs, deflate_matrix, deflation_residual, ColumnReport, ExitReason, SolverReport};
use crate::combiner::{CombinerMatrix, PhaseAlphabet, PrefixBounds};
use crate::error::Result;
use crate::numerics::{rayleigh_quotient, ComplexMatrix, C64};

/// Sequential greedy: fix one entry at a time to the alphabet element with
/// the largest relaxed bound. Ties go to the lowest index.
pub fn sg_bc(
    r: impl AsRef<ComplexMatrix>,
    k: usize,
    alphabet: &PhaseAlphabet,
) -> Result<(CombinerMatrix, SolverReport)> {
    let r = r.as_ref();
    let l = check_inputs(r, k)?;
    let mut combiner = CombinerMatrix::empty(alphabet.clone(), l);
    let mut report = SolverReport::default();
    let mut r_b = r.clone();
    for _ in 0..k {
        let start = Instant::now();
        let (indices, evaluations) = greedy_column(&r_b, alphabet)?;
        let rq = rayleigh_quotient(&r_b, alphabet.vector(&indices).as_slice());
        combiner.push(indices);
        let a_c = combiner.matrix();
        r_b = deflate_matrix(&r_b, &a_c);
        report.columns.push(ColumnReport {
            trajectory: vec![rq],
            nodes_expanded: l.saturating_sub(1),
            nodes_pruned: 0,
            bound_evaluations: evaluations,
            wall_time: start.elapsed(),
            epsilon_used: 0.0,
            exit: ExitReason::Direct,
            certified: false,
            rayleigh_quotient: rq,
            deflation_residual: deflation_residual(&r_b, &a_c),
            frontier_bound: None,
            pruned: Vec::new(),
        });
    }
    report.finish(&combiner, r);
    Ok((combiner, report))
}

fn greedy_column(r_b: &ComplexMatrix, alphabet: &PhaseAlphabet) -> Result<(Vec<usize>, usize)> {
    let l = r_b.rows();
    // the objective ignores a global phase, so the first entry is ψ_0
    let mut indices = vec![0usize];
    let mut fixed: Vec<C64> = vec![alphabet.element(0)];
    let mut evaluations = 0;
    if l == 1 {
        return Ok((indices, evaluations));
    }
    let bounds = PrefixBounds::new(r_b)?;
    for pos in 1..l {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (n, &psi) in alphabet.elements().iter().enumerate() {
            fixed.push(psi);
            evaluations += 1;
            let v = if pos + 1 == l {
                rayleigh_quotient(r_b, &fixed)
            } else {
                bounds.solve(&fixed)?.lambda_star
            };
            fixed.pop();
            if v > best.1 {
                best = (n, v);
            }
        }
        indices.push(best.0);
        fixed.push(alphabet.element(best.0));
    }
    Ok((indices, evaluations))
}
