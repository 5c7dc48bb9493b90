use crate::channel::Ccm;
use crate::combiner::CombinerMatrix;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// `R_b ← P† R_b P` with `P = I_L − (1/L) A_C A_C†`.
///
/// For a single unit-modulus column `w` (`‖w‖² = L`) this is the orthogonal
/// projector onto `w⊥`. For several columns it is only exact when they are
/// mutually orthogonal; see [`deflation_residual`].
pub fn deflate(r_b: &Ccm, a_c: &CombinerMatrix) -> Result<Ccm> {
    if a_c.beams() != r_b.dim() {
        return Err(Error::Dimension(format!(
            "combiner has {} beams but CCM is {}x{}",
            a_c.beams(),
            r_b.dim(),
            r_b.dim()
        )));
    }
    Ok(Ccm {
        matrix: deflate_matrix(&r_b.matrix, &a_c.matrix()),
        ..r_b.clone()
    })
}

pub fn deflate_matrix(r_b: &ComplexMatrix, a_c: &ComplexMatrix) -> ComplexMatrix {
    if a_c.cols() == 0 {
        return r_b.clone();
    }
    let l = r_b.rows();
    let mut p = a_c.mul(&a_c.adjoint()).scale(-1.0 / l as f64);
    p.shift_diagonal(1.0);
    // P is Hermitian, so P† R P is a congruence by P
    p.congruence(r_b)
}

/// Largest `‖R_b w‖₂` over the columns of `a_c`.
pub fn deflation_residual(r_b: &ComplexMatrix, a_c: &ComplexMatrix) -> f64 {
    (0..a_c.cols())
        .map(|j| r_b.matvec(&a_c.column(j)).norm())
        .fold(0.0, f64::max)
}
