use crate::channel::Ccm;
use crate::error::{Error, Result};
use crate::numerics::{herm_eig, ComplexMatrix, ComplexVector};

/// Columns whose Gram-Schmidt residual falls below this fraction of their
/// norm count as linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the column span, or an error if the columns are
/// linearly dependent. Modified Gram-Schmidt with one re-orthogonalization
/// pass.
pub fn orthonormal_columns(a: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let original = v.norm();
        if original == 0.0 {
            return Err(Error::DegenerateCombiner);
        }
        for _pass in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                for (vi, qi) in v.0.iter_mut().zip(q.iter()) {
                    *vi -= c * qi;
                }
            }
        }
        let n = v.norm();
        if n <= RANK_TOL * original {
            return Err(Error::DegenerateCombiner);
        }
        basis.push(v.scale((1.0 / n).into()));
    }
    Ok(basis)
}

/// Spatial compression efficiency `tr(P R_bs) / total_power`, where `P`
/// projects onto the span of the combiner's columns.
///
/// For a combiner with orthonormal columns this is exactly
/// `tr(A_C R_bs A_C†) / total_power`. Unit-modulus combiners are not
/// orthonormal; the projector credits the power that the best baseband
/// post-processing of the `K` outputs could retain.
pub fn efficiency(combiner: &ComplexMatrix, r_bs: impl AsRef<ComplexMatrix>, total_power: f64) -> Result<f64> {
    let r = r_bs.as_ref();
    if !(total_power > 0.0) {
        return Err(Error::Input(format!("total power must be positive, got {total_power}")));
    }
    if combiner.rows() != r.rows() || !r.is_square() {
        return Err(Error::Dimension(format!(
            "combiner has {} rows but CCM is {}x{}",
            combiner.rows(),
            r.rows(),
            r.cols()
        )));
    }
    let basis = orthonormal_columns(combiner)?;
    let kept: f64 = basis.iter().map(|q| r.quadratic_form(q.as_slice())).sum();
    Ok(kept / total_power)
}

/// Unconstrained optimum: the dominant eigenvectors and the efficiency they
/// achieve.
#[derive(Debug, Clone)]
pub struct UnconstrainedOptimum {
    /// `N × N_s`; column `i` is the `i`-th dominant eigenvector.
    pub combiner: ComplexMatrix,
    /// `Σ_{i≤N_s}(λ_i − σ²)₊ / Σ_i (λ_i − σ²)₊`.
    pub eta: f64,
}

impl UnconstrainedOptimum {
    /// The combiner written as `N_s × N` rows, `F = U_s†`.
    pub fn rows(&self) -> ComplexMatrix {
        self.combiner.adjoint()
    }
}

pub fn optimal_unconstrained(r: &Ccm, ns: usize) -> Result<UnconstrainedOptimum> {
    let n = r.dim();
    if ns == 0 || ns > n {
        return Err(Error::Input(format!("need 1 ≤ N_s ≤ {n}, got {ns}")));
    }
    let eig = herm_eig(&r.matrix)?;
    let sigma2 = r.noise_variance;
    let excess = |l: &f64| (l - sigma2).max(0.0);
    let den: f64 = eig.eigenvalues.iter().map(excess).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let num: f64 = eig.eigenvalues[..ns].iter().map(excess).sum();
    let all: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..ns).collect();
    Ok(UnconstrainedOptimum {
        combiner: eig.eigenvectors.submatrix(&all, &cols),
        eta: num / den,
    })
}
