//! Maximize the Rayleigh quotient `x†Rx / x†x` over `x = [d_I; w_J]` with the
//! leading block `d_I` fixed and the tail `w_J` free.
//!
//! Write `R = [[R_I, R_IJ], [R_JI, R_J]]`, `p = R_JI d_I`, `r = d_I† R_I d_I`,
//! `d = d_I† d_I` and `R_J = U Σ U†`. Unless `p` is orthogonal to the dominant
//! eigenspace of `R_J` and the C1 condition holds, the optimum is the unique
//! root `λ*` above `λ_1` of `λd − r = Σ |(U†p)_i|² / (λ − λ_i)`, attained at
//! `w_J = (λ*I − R_J)⁻¹ p`. In the degenerate case the supremum is
//! `max(λ_1, r/d)`, approached either by `w_J = 0` or by `β·u_dom`, `β → ∞`.

use crate::combiner::PhaseAlphabet;
use crate::error::{Error, Result};
use crate::numerics::{
    dominant_multiplicity, herm_eig, rayleigh_quotient, solve_secular, ComplexMatrix, ComplexVector, HermEig,
    SecularProblem, C64,
};

/// `|u_dom† p|² ≤ TOL_Q ‖p‖²` counts as orthogonal to the dominant subspace.
pub const TOL_Q: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SubproblemInstance {
    r: ComplexMatrix,
    d_i: ComplexVector,
    p: Vec<C64>,
    r_scalar: f64,
    d: f64,
}

impl SubproblemInstance {
    pub fn new(r: &ComplexMatrix, d_i: ComplexVector) -> Result<Self> {
        let n = r.rows();
        if !r.is_square() {
            return Err(Error::Dimension("CCM must be square".into()));
        }
        let l = d_i.len();
        if l == 0 || l > n {
            return Err(Error::Dimension(format!("fixed block of length {l} for a {n}x{n} CCM")));
        }
        if !r.is_hermitian(1e-10) {
            return Err(Error::Input("CCM is not Hermitian".into()));
        }
        let d = d_i.norm_sqr();
        if !(d > 0.0) {
            return Err(Error::Input("fixed block must be non-zero".into()));
        }
        let (p, r_scalar) = coupling(r, d_i.as_slice());
        Ok(Self {
            r: r.clone(),
            d_i,
            p,
            r_scalar,
            d,
        })
    }

    pub fn ccm(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn fixed(&self) -> &ComplexVector {
        &self.d_i
    }

    pub fn p(&self) -> &[C64] {
        &self.p
    }

    /// `r = d_I† R_I d_I`.
    pub fn r(&self) -> f64 {
        self.r_scalar
    }

    /// `d = d_I† d_I`.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn r_j(&self) -> ComplexMatrix {
        let n = self.r.rows();
        let l = self.d_i.len();
        self.r.block(l, n, l, n)
    }

    /// `η([d_I; w_J])`.
    pub fn objective(&self, w_j: &ComplexVector) -> f64 {
        rayleigh_quotient(&self.r, self.d_i.concat(w_j).as_slice())
    }
}

/// `p = R_JI d_I` and `r = d_I† R_I d_I` for the leading block `d_i`.
fn coupling(r: &ComplexMatrix, d_i: &[C64]) -> (Vec<C64>, f64) {
    let n = r.rows();
    let l = d_i.len();
    let p = (l..n)
        .map(|j| r.row(j)[..l].iter().zip(d_i).map(|(a, b)| a * b).sum())
        .collect();
    let mut rs = 0.0;
    for i in 0..l {
        let ri: C64 = r.row(i)[..l].iter().zip(d_i).map(|(a, b)| a * b).sum();
        rs += (d_i[i].conj() * ri).re;
    }
    (p, rs.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Completion {
    /// Finite optimizer `w_J*`.
    Vector(ComplexVector),
    /// `w_J = 0` attains `r/d`.
    Zero,
    /// `β·u_dom` with `β → ∞` approaches `λ_1`; holds the unit vector `u_dom`.
    DominantRay(ComplexVector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemCase {
    Secular,
    DegenerateC1,
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub lambda_star: f64,
    pub w_j: Completion,
    pub case: SubproblemCase,
}

impl SubproblemSolution {
    /// A finite tail whose entry phases represent the optimizer; used for
    /// rounding to the phase alphabet.
    pub fn direction(&self, len: usize) -> ComplexVector {
        match &self.w_j {
            Completion::Vector(w) | Completion::DominantRay(w) => w.clone(),
            Completion::Zero => ComplexVector::zeros(len),
        }
    }
}

pub fn solve_subproblem(inst: &SubproblemInstance) -> Result<SubproblemSolution> {
    let eig = herm_eig(&inst.r_j())?;
    solve_with_spectrum(&eig, &inst.p, inst.r_scalar, inst.d)
}

/// Sub-problem optimum given the eigendecomposition of `R_J`.
pub(crate) fn solve_with_spectrum(eig: &HermEig, p: &[C64], r: f64, d: f64) -> Result<SubproblemSolution> {
    if eig.dim() == 0 {
        return Ok(SubproblemSolution {
            lambda_star: r / d,
            w_j: Completion::Vector(ComplexVector::default()),
            case: SubproblemCase::Secular,
        });
    }
    let q = eig.project(p);
    let weights: Vec<f64> = q.iter().map(|z| z.norm_sqr()).collect();
    let poles = &eig.eigenvalues;
    let m = dominant_multiplicity(poles);
    let p_norm2: f64 = weights.iter().sum();
    let group: f64 = weights[..m].iter().sum();

    if group <= TOL_Q * p_norm2 && c1_holds(poles, &weights, m, r, d) {
        return Ok(degenerate(eig, r, d));
    }

    let prob = SecularProblem::new(poles.clone(), weights, d, r)?;
    match solve_secular(&prob) {
        Ok(lambda) => {
            let y: Vec<C64> = q
                .iter()
                .zip(poles)
                .map(|(qi, li)| {
                    let gap = lambda - li;
                    if qi.norm_sqr() == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        qi / gap
                    }
                })
                .collect();
            Ok(SubproblemSolution {
                lambda_star: lambda,
                w_j: Completion::Vector(eig.expand(&y)),
                case: SubproblemCase::Secular,
            })
        }
        // only reachable when the dominant weight is (numerically) zero
        Err(Error::NoRoot { .. }) => Ok(degenerate(eig, r, d)),
        Err(e) => Err(e),
    }
}

/// C1: `λ_1 d − r − Σ_{i>m} |q_i|² / (λ_1 − λ_i) > 0`.
fn c1_holds(poles: &[f64], weights: &[f64], m: usize, r: f64, d: f64) -> bool {
    let l1 = poles[0];
    let tail: f64 = poles[m..].iter().zip(&weights[m..]).map(|(li, w)| w / (l1 - li)).sum();
    l1 * d - r - tail > 0.0
}

fn degenerate(eig: &HermEig, r: f64, d: f64) -> SubproblemSolution {
    let l1 = eig.eigenvalues[0];
    let ratio = r / d;
    let w_j = if l1 > ratio {
        Completion::DominantRay(eig.vector(0))
    } else {
        Completion::Zero
    };
    SubproblemSolution {
        lambda_star: l1.max(ratio),
        w_j,
        case: SubproblemCase::DegenerateC1,
    }
}

/// Approximate optimum after quantizing `w_J*` to a `B`-bit alphabet,
/// modeling the quantization error as white with power `2^{−B}‖w_J*‖²`.
pub fn approx_discrete_bound(
    sol: &SubproblemSolution,
    inst: &SubproblemInstance,
    alphabet: &PhaseAlphabet,
) -> Result<f64> {
    let (SubproblemCase::Secular, Completion::Vector(w)) = (sol.case, &sol.w_j) else {
        return Err(Error::NotApplicable(
            "quantization estimate needs a finite secular optimizer",
        ));
    };
    let r_j = inst.r_j();
    let pw: C64 = inst.p.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
    let quad = if w.is_empty() {
        0.0
    } else {
        r_j.quadratic_form(w.as_slice())
    };
    Ok(quantized_ratio(
        inst.r_scalar,
        inst.d,
        quad,
        pw.re,
        w.norm_sqr(),
        r_j.trace_re(),
        w.len(),
        alphabet.bits(),
    ))
}

/// Same estimate evaluated from the spectrum of `R_J`.
pub(crate) fn approx_from_spectrum(eig: &HermEig, p: &[C64], r: f64, d: f64, lambda: f64, bits: u32) -> f64 {
    let q = eig.project(p);
    let mut quad = 0.0;
    let mut pw = 0.0;
    let mut ww = 0.0;
    for (qi, li) in q.iter().zip(&eig.eigenvalues) {
        let yi = qi / (lambda - li);
        quad += li * yi.norm_sqr();
        pw += (qi.conj() * yi).re;
        ww += yi.norm_sqr();
    }
    let trace: f64 = eig.eigenvalues.iter().sum();
    quantized_ratio(r, d, quad, pw, ww, trace, eig.dim(), bits)
}

#[allow(clippy::too_many_arguments)]
fn quantized_ratio(r: f64, d: f64, quad: f64, re_pw: f64, ww: f64, trace_j: f64, len: usize, bits: u32) -> f64 {
    let sigma_e2 = ww * 2f64.powi(-(bits as i32));
    let spread = if len == 0 { 0.0 } else { sigma_e2 * trace_j / len as f64 };
    (r + quad + 2.0 * re_pw + spread) / (d + ww + sigma_e2)
}

/// Sub-problem bounds for every prefix length of one CCM, with the tail
/// eigendecompositions computed once.
#[derive(Debug, Clone)]
pub struct PrefixBounds {
    r: ComplexMatrix,
    tails: Vec<HermEig>,
}

impl PrefixBounds {
    pub fn new(r: &ComplexMatrix) -> Result<Self> {
        let n = r.rows();
        let tails = (1..=n)
            .map(|l| herm_eig(&r.block(l, n, l, n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r: r.clone(), tails })
    }

    pub fn dim(&self) -> usize {
        self.r.rows()
    }

    pub fn ccm(&self) -> &ComplexMatrix {
        &self.r
    }

    /// Optimum of the relaxed problem with the given fixed prefix.
    pub fn solve(&self, prefix: &[C64]) -> Result<SubproblemSolution> {
        let (p, r, d) = self.scalars(prefix)?;
        solve_with_spectrum(&self.tails[prefix.len() - 1], &p, r, d)
    }

    /// Quantization-aware estimate for a secular solution at this prefix.
    pub fn approx(&self, prefix: &[C64], sol: &SubproblemSolution, bits: u32) -> Option<f64> {
        if sol.case != SubproblemCase::Secular {
            return None;
        }
        let (p, r, d) = self.scalars(prefix).ok()?;
        Some(approx_from_spectrum(
            &self.tails[prefix.len() - 1],
            &p,
            r,
            d,
            sol.lambda_star,
            bits,
        ))
    }

    fn scalars(&self, prefix: &[C64]) -> Result<(Vec<C64>, f64, f64)> {
        let l = prefix.len();
        if l == 0 || l > self.dim() {
            return Err(Error::Dimension(format!(
                "prefix of length {l} for dimension {}",
                self.dim()
            )));
        }
        let d: f64 = prefix.iter().map(|z| z.norm_sqr()).sum();
        if !(d > 0.0) {
            return Err(Error::Input("prefix must be non-zero".into()));
        }
        let (p, r) = coupling(&self.r, prefix);
        Ok((p, r, d))
    }
}
