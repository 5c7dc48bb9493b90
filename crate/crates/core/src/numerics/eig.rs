//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use super::matrix::{ComplexMatrix, ComplexVector, C64};
use crate::error::{Error, Result};

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenpairs of a Hermitian matrix, eigenvalues non-increasing.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are unit-norm eigenvectors in the same order as `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> ComplexVector {
        self.eigenvectors.column(i)
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let lam = self.eigenvalues[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out.symmetrize();
        out
    }

    /// `U† x`: coordinates of `x` in the eigenbasis.
    pub fn project(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let v = &self.eigenvectors;
        (0..n).map(|k| (0..n).map(|i| v[(i, k)].conj() * x[i]).sum()).collect()
    }

    /// `U y`: maps eigenbasis coordinates back.
    pub fn expand(&self, y: &[C64]) -> ComplexVector {
        let n = self.dim();
        let v = &self.eigenvectors;
        (0..n).map(|i| (0..n).map(|k| v[(i, k)] * y[k]).sum()).collect()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(A + A†)/2` before rotating. Each returned
/// eigenvector has its first non-negligible entry real and positive, so the
/// output is deterministic for a given input.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEig> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm = a.frobenius_norm();
    if a.hermitian_defect() > HERMITIAN_TOL * norm {
        return Err(Error::Input("matrix is not Hermitian".into()));
    }

    let n = a.rows();
    let mut w = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    if norm > 0.0 {
        for _sweep in 0..MAX_SWEEPS {
            if off_diagonal_norm(&w) <= OFF_DIAGONAL_TOL * norm {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut w, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = w.diagonal_re();
    // stable sort keeps the original index order among equal eigenvalues
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = v.submatrix(&(0..n).collect::<Vec<_>>(), &order);
    for k in 0..n {
        fix_phase(&mut eigenvectors, k);
    }
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(w: &ComplexMatrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilate `w[p, q]` with the unitary `G = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]]`,
/// `W ← G† W G`, `V ← V G`.
fn rotate(w: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let phase = apq / b;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let g_pq = phase * s;
    let g_qp = -phase.conj() * s;

    let n = w.rows();
    // W G (columns p, q)
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = wkp * c + wkq * g_qp;
        w[(k, q)] = wkp * g_pq + wkq * c;
    }
    // G† (W G) (rows p, q)
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = wpk * c + wqk * g_qp.conj();
        w[(q, k)] = wpk * g_pq.conj() + wqk * c;
    }
    w[(p, q)] = C64::new(0.0, 0.0);
    w[(q, p)] = C64::new(0.0, 0.0);
    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * c;
    }
}

fn fix_phase(v: &mut ComplexMatrix, k: usize) {
    let n = v.rows();
    let peak = (0..n).map(|i| v[(i, k)].norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    let Some(lead) = (0..n).find(|&i| v[(i, k)].norm() > 1e-8 * peak) else {
        return;
    };
    let z = v[(lead, k)];
    let rot = z.conj() / z.norm();
    let mut nrm = 0.0;
    for i in 0..n {
        v[(i, k)] *= rot;
        nrm += v[(i, k)].norm_sqr();
    }
    v[(lead, k)] = C64::new(v[(lead, k)].re, 0.0);
    let nrm = nrm.sqrt();
    for i in 0..n {
        v[(i, k)] /= nrm;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, rank, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        g.mul(&g.adjoint())
    }

    #[test]
    fn identity_is_fixed() {
        let e = herm_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.eigenvectors, ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = herm_eig(&ComplexMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 1.0]);
        assert_eq!(e.vector(0)[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(matches!(
            herm_eig(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = C64::new(f64::INFINITY, 0.0);
        // IndexMut bypasses the constructor's finiteness check
        assert!(matches!(herm_eig(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = C64::new(1.0, 0.0);
        assert!(herm_eig(&a).is_err());
    }

    #[test]
    fn random_reconstruction_and_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 8, 17] {
            let a = random_psd(n, n, &mut rng);
            let norm = a.frobenius_norm();
            let e = herm_eig(&a).unwrap();
            let back = e.reconstruct();
            assert!(back.sub(&a).frobenius_norm() <= 1e-9 * norm);
            for k in 0..n {
                let vk = e.vector(k);
                let av = a.matvec(&vk);
                let resid: f64 = av
                    .iter()
                    .zip(vk.iter())
                    .map(|(x, y)| (x - y * e.eigenvalues[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(resid <= 1e-10 * norm, "n={n} k={k} resid={resid}");
            }
            let vhv = e.eigenvectors.adjoint().mul(&e.eigenvectors);
            assert!(vhv.sub(&ComplexMatrix::identity(n)).frobenius_norm() < 1e-10);
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let tr = a.trace_re();
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - tr).abs() <= 1e-9 * tr.abs());
            assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10 * norm));
        }
    }

    #[test]
    fn deterministic_and_phase_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_psd(6, 3, &mut rng);
        let e1 = herm_eig(&a).unwrap();
        let e2 = herm_eig(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
        for k in 0..6 {
            let v = e1.vector(k);
            let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = v.iter().find(|z| z.norm() > 1e-8 * peak).unwrap();
            assert_eq!(lead.im, 0.0);
            assert!(lead.re > 0.0);
        }
    }
}
