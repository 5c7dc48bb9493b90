//! DFT beamspace transformation, beam selection and leakage analysis.

use crate::channel::{steering, steering_from_sine, Ccm, DEFAULT_SPACING};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector};

/// Placement of the DFT grid in directional-sine space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAlignment {
    /// `sinθ_i = (λ/(dM))·(i − (M+1)/2)`, `i = 1..M`. Symmetric about
    /// broadside; for even `M` broadside falls between two beams.
    Centered,
    /// `sinθ_i = (λ/(dM))·(i − ⌊M/2⌋ − 1)`: a plain DFT grid with a beam at
    /// broadside. Identical to `Centered` for odd `M`.
    Broadside,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Linear(Vec<f64>),
    Planar { rows: Vec<f64>, cols: Vec<f64> },
}

/// Beamspace transform `A_L` whose rows are conjugated steering vectors at
/// the grid directions, optionally followed by beam selection.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamspaceOperator {
    antennas: usize,
    matrix: ComplexMatrix,
    grid: Grid,
    selected: Option<Vec<usize>>,
}

impl BeamspaceOperator {
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Full `M × M` transform, ignoring any selection.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn selected(&self) -> Option<&[usize]> {
        self.selected.as_deref()
    }

    /// Restrict the operator to the given beams (in order).
    pub fn with_selection(mut self, beams: Vec<usize>) -> Result<Self> {
        if beams.is_empty() || beams.iter().any(|&b| b >= self.antennas) {
            return Err(Error::Input("beam selection out of range".into()));
        }
        self.selected = Some(beams);
        Ok(self)
    }

    /// The transform with selection applied: `L × M`.
    pub fn selected_matrix(&self) -> ComplexMatrix {
        match &self.selected {
            Some(sel) => self.matrix.submatrix(sel, &(0..self.antennas).collect::<Vec<_>>()),
            None => self.matrix.clone(),
        }
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        self.selected_matrix().matvec(x)
    }
}

/// Centered DFT beamspace operator for an `m`-element ULA.
pub fn dft_operator(m: usize, spacing: f64) -> Result<BeamspaceOperator> {
    dft_operator_aligned(m, spacing, GridAlignment::Centered)
}

pub fn dft_operator_aligned(m: usize, spacing: f64, alignment: GridAlignment) -> Result<BeamspaceOperator> {
    if m < 2 {
        return Err(Error::Input(format!("beamspace needs at least 2 antennas, got {m}")));
    }
    if !(spacing > 0.0) {
        return Err(Error::Input("spacing must be positive".into()));
    }
    let offset = match alignment {
        GridAlignment::Centered => (m as f64 + 1.0) / 2.0,
        GridAlignment::Broadside => (m / 2) as f64 + 1.0,
    };
    let sines: Vec<f64> = (1..=m).map(|i| (i as f64 - offset) / (spacing * m as f64)).collect();
    let rows: Vec<ComplexVector> = sines.iter().map(|&s| steering_from_sine(s, m, spacing)).collect();
    let matrix = ComplexMatrix::from_fn(m, m, |i, j| rows[i][j].conj());
    Ok(BeamspaceOperator {
        antennas: m,
        matrix,
        grid: Grid::Linear(sines),
        selected: None,
    })
}

/// Planar operator `A_row ⊗ A_col`, guarded by `max_dim` on the product size.
pub fn two_dim_operator(
    rows_op: &BeamspaceOperator,
    cols_op: &BeamspaceOperator,
    max_dim: usize,
) -> Result<BeamspaceOperator> {
    let dim = rows_op
        .antennas
        .checked_mul(cols_op.antennas)
        .filter(|&d| d <= max_dim)
        .ok_or_else(|| {
            Error::Dimension(format!(
                "{}x{} planar array exceeds the limit of {max_dim} elements",
                rows_op.antennas, cols_op.antennas
            ))
        })?;
    let (Grid::Linear(r), Grid::Linear(c)) = (&rows_op.grid, &cols_op.grid) else {
        return Err(Error::Input("planar operator needs two linear operators".into()));
    };
    Ok(BeamspaceOperator {
        antennas: dim,
        matrix: rows_op.matrix.kron(&cols_op.matrix),
        grid: Grid::Planar {
            rows: r.clone(),
            cols: c.clone(),
        },
        selected: None,
    })
}

/// `A_L R A_L†` restricted to the operator's selected beams.
pub fn beamspace_ccm(op: &BeamspaceOperator, r: &Ccm) -> Result<Ccm> {
    if r.dim() != op.antennas {
        return Err(Error::Dimension(format!(
            "operator has {} antennas but CCM is {}x{}",
            op.antennas,
            r.dim(),
            r.dim()
        )));
    }
    let full = op.matrix.congruence(&r.matrix);
    let matrix = match &op.selected {
        Some(sel) => full.submatrix(sel, sel),
        None => full,
    };
    Ok(Ccm { matrix, ..r.clone() })
}

/// Indices of the `l` strongest beams by diagonal power, strongest first,
/// ties to the lower index.
pub fn select_beams(r_bs: &Ccm, l: usize) -> Result<Vec<usize>> {
    let n = r_bs.dim();
    if l == 0 || l > n {
        return Err(Error::Input(format!("cannot select {l} of {n} beams")));
    }
    let diag = r_bs.matrix.diagonal_re();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| diag[b].total_cmp(&diag[a]).then(a.cmp(&b)));
    idx.truncate(l);
    Ok(idx)
}

/// Fraction of a single ray's power landing in each beam of a broadside-
/// aligned `m`-point DFT at critical spacing.
pub fn leakage_profile(theta: f64, m: usize) -> Result<Vec<f64>> {
    if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Input(format!("AoA {theta} outside (-π/2, π/2)")));
    }
    let op = dft_operator_aligned(m, DEFAULT_SPACING, GridAlignment::Broadside)?;
    let a = steering(theta, m, DEFAULT_SPACING);
    Ok(op.apply(&a).iter().map(|z| z.norm_sqr()).collect())
}

/// Large-array estimate of non-zero beams: `(M/2)·|∪ Ω_n|` with the union
/// measured exactly. Interval endpoints may come in either order.
pub fn estimate_beam_count(spreads: &[(f64, f64)], m: usize) -> Result<f64> {
    let mut ivs: Vec<(f64, f64)> = spreads.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if ivs.iter().any(|&(a, b)| !(a >= -1.0 && b <= 1.0)) {
        return Err(Error::Input("directional-sine intervals must lie in [-1, 1]".into()));
    }
    ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut measure = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (a, b) in ivs {
        current = match current {
            Some((lo, hi)) if a <= hi => Some((lo, hi.max(b))),
            Some((lo, hi)) => {
                measure += hi - lo;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((lo, hi)) = current {
        measure += hi - lo;
    }
    Ok(m as f64 / 2.0 * measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{CcmKind, MpcSet, Ray, UserGeometry};
    use crate::numerics::C64;

    fn unitarity_defect(a: &ComplexMatrix) -> f64 {
        a.mul(&a.adjoint())
            .sub(&ComplexMatrix::identity(a.rows()))
            .frobenius_norm()
    }

    #[test]
    fn smallest_operator() {
        let op = dft_operator(2, 0.5).unwrap();
        for z in op.matrix().as_slice() {
            assert!((z.norm() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        }
        assert!(unitarity_defect(op.matrix()) < 1e-14);
    }

    #[test]
    fn operators_are_unitary() {
        for m in [3, 16, 33, 64] {
            for align in [GridAlignment::Centered, GridAlignment::Broadside] {
                let op = dft_operator_aligned(m, 0.5, align).unwrap();
                assert!(unitarity_defect(op.matrix()) <= 1e-9 * (m as f64).sqrt());
            }
        }
    }

    #[test]
    fn grid_direction_maps_to_basis_vector() {
        let m = 16;
        let op = dft_operator(m, 0.5).unwrap();
        let Grid::Linear(sines) = op.grid().clone() else {
            unreachable!()
        };
        for k in [0, 5, 15] {
            let out = op.apply(&steering_from_sine(sines[k], m, 0.5));
            for (i, z) in out.iter().enumerate() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((z.norm() - want).abs() < 1e-12);
            }
        }
        // grid follows (2/M)(i − (M+1)/2)
        assert!((sines[0] + 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn planar_operator() {
        let a = dft_operator(2, 0.5).unwrap();
        let k = two_dim_operator(&a, &a, 64).unwrap();
        assert_eq!(k.antennas(), 4);
        assert!(unitarity_defect(k.matrix()) < 1e-14);
        assert!(two_dim_operator(&a, &a, 3).is_err());
    }

    #[test]
    fn planar_response_is_separable() {
        let (mr, mc) = (4, 3);
        let ar = dft_operator(mr, 0.5).unwrap();
        let ac = dft_operator(mc, 0.5).unwrap();
        let planar = two_dim_operator(&ar, &ac, 100).unwrap();
        let (sr, sc) = (0.31, -0.47);
        let vr = steering_from_sine(sr, mr, 0.5);
        let vc = steering_from_sine(sc, mc, 0.5);
        let v: ComplexVector = (0..mr * mc).map(|i| vr[i / mc] * vc[i % mc]).collect();
        let out = planar.apply(&v);
        let (or, oc) = (ar.apply(&vr), ac.apply(&vc));
        for i in 0..mr * mc {
            assert!((out[i] - or[i / mc] * oc[i % mc]).norm() < 1e-13);
        }
    }

    fn ccm_of(m: ComplexMatrix) -> Ccm {
        Ccm::new(m, CcmKind::Ensemble).unwrap()
    }

    #[test]
    fn beamspace_preserves_trace() {
        let m = 8;
        let g = ComplexMatrix::from_fn(m, 3, |i, j| C64::new((i + j) as f64 * 0.1, (i * j) as f64 * 0.05));
        let r = ccm_of(g.mul(&g.adjoint()));
        let op = dft_operator(m, 0.5).unwrap();
        let bs = beamspace_ccm(&op, &r).unwrap();
        assert!((bs.trace() - r.trace()).abs() <= 1e-9 * r.trace());
        let all = op.clone().with_selection((0..m).collect()).unwrap();
        let bs_all = beamspace_ccm(&all, &r).unwrap();
        assert!(bs_all.matrix.sub(&bs.matrix).frobenius_norm() < 1e-12);
        assert!(beamspace_ccm(&dft_operator(4, 0.5).unwrap(), &r).is_err());
    }

    #[test]
    fn grid_aligned_ray_is_one_beam() {
        let m = 16;
        let op = dft_operator(m, 0.5).unwrap();
        let Grid::Linear(sines) = op.grid().clone() else {
            unreachable!()
        };
        let geo = MpcSet::new(
            vec![UserGeometry {
                rays: vec![Ray {
                    aoa: sines[6].asin(),
                    power: 1.0,
                }],
                angular_spread: (sines[6], sines[6]),
            }],
            m,
            0.5,
        )
        .unwrap();
        let bs = beamspace_ccm(&op, &crate::channel::ensemble_ccm(&geo)).unwrap();
        for i in 0..m {
            for j in 0..m {
                let want = if i == 6 && j == 6 { m as f64 } else { 0.0 };
                assert!((bs.matrix[(i, j)] - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        let top = select_beams(&bs, 1).unwrap();
        assert_eq!(top, vec![6]);
        assert!(bs.matrix[(6, 6)].re / bs.trace() > 0.999);
    }

    #[test]
    fn selection_order_and_ties() {
        let r = ccm_of(ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]));
        assert_eq!(select_beams(&r, 2).unwrap(), vec![0, 2]);
        assert_eq!(select_beams(&r, 3).unwrap(), vec![0, 2, 1]);
        let tie = ccm_of(ComplexMatrix::from_real_diag(&[1.0, 1.0, 1.0]));
        assert_eq!(select_beams(&tie, 3).unwrap(), vec![0, 1, 2]);
        assert!(select_beams(&r, 0).is_err());
        assert!(select_beams(&r, 4).is_err());
    }

    #[test]
    fn leakage_profiles() {
        let on = leakage_profile(0.0, 16).unwrap();
        assert!((on.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(on.iter().cloned().fold(0.0, f64::max) > 1.0 - 1e-12);
        let off = leakage_profile(0.063, 16).unwrap();
        assert!((off.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(off.iter().cloned().fold(0.0, f64::max) < 0.95);
        assert!(leakage_profile(2.0, 16).is_err());
    }

    #[test]
    fn beam_count_union() {
        assert_eq!(estimate_beam_count(&[], 64).unwrap(), 0.0);
        let one = estimate_beam_count(&[(0.0, 0.5)], 100).unwrap();
        assert!((one - 25.0).abs() < 1e-12);
        // overlapping intervals merge, disjoint ones add
        let merged = estimate_beam_count(&[(0.0, 0.5), (0.25, 0.75)], 100).unwrap();
        assert!((merged - 37.5).abs() < 1e-12);
        let disjoint = estimate_beam_count(&[(-0.5, -0.25), (0.5, 0.25)], 100).unwrap();
        assert!((disjoint - 25.0).abs() < 1e-12);
        assert!(estimate_beam_count(&[(0.0, 1.5)], 8).is_err());
    }
}
