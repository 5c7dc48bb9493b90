use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combiner::{efficiency, solve_subproblem, Completion, PhaseAlphabet, SubproblemCase, SubproblemInstance};
use crate::error::Result;
use crate::numerics::{herm_eig, rayleigh_quotient, solve_secular, ComplexMatrix, ComplexVector, SecularProblem, C64};
use crate::solvers::{bb_bc, deflate_matrix, exhaustive, BbOptions};

/// Tolerances of the embedded checks. Tightening one past what the
/// numerics achieve makes the named check fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestTolerances {
    pub secular_residual: f64,
    pub subproblem_slack: f64,
    pub subproblem_consistency: f64,
    pub bb_exact: f64,
    pub plugin_efficiency: f64,
    pub deflation: f64,
}

impl Default for SelftestTolerances {
    fn default() -> Self {
        Self {
            secular_residual: 1e-10,
            subproblem_slack: 1e-9,
            subproblem_consistency: 1e-8,
            bb_exact: 1e-12,
            plugin_efficiency: 1e-9,
            deflation: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestSummary {
    pub checks: Vec<CheckResult>,
    pub elapsed: Duration,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

impl fmt::Display for SelftestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<24} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        write!(
            f,
            "{}/{} checks passed in {:.2} s",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
            self.elapsed.as_secs_f64()
        )
    }
}

type Check = fn(&SelftestTolerances) -> Result<(bool, String)>;

pub fn selftest(tol: &SelftestTolerances) -> SelftestSummary {
    let start = Instant::now();
    let checks: Vec<(&'static str, Check)> = vec![
        ("secular-residual", secular_check),
        ("subproblem-grid-oracle", subproblem_check),
        ("bb-vs-exhaustive", bb_check),
        ("plugin-efficiency-consistency", plugin_check),
        ("deflation-kernel", deflation_check),
    ];
    let checks = checks
        .into_iter()
        .map(|(name, run)| match run(tol) {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect();
    SelftestSummary {
        checks,
        elapsed: start.elapsed(),
    }
}

fn gaussian_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, rank, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let mut r = g.mul(&g.adjoint());
    r.symmetrize();
    r
}

fn random_vec(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexVector {
    (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale)
        .collect()
}

fn secular_check(tol: &SelftestTolerances) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ec);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let mut poles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0).collect();
        poles.sort_by(|a, b| b.total_cmp(a));
        let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let d = 0.1 + rng.random::<f64>() * 3.0;
        let r = rng.random::<f64>() * 2.0;
        let prob = SecularProblem::new(poles, weights, d, r)?;
        let lambda = solve_secular(&prob)?;
        let (lo, hi) = prob.interval().expect("poles present");
        if !(lambda > lo && lambda <= hi * (1.0 + 1e-12)) {
            return Ok((false, format!("root {lambda} outside ({lo}, {hi}]")));
        }
        worst = worst.max(prob.f(lambda).abs() / (d * lambda).max(1.0));
    }
    Ok((
        worst <= tol.secular_residual,
        format!("max scaled residual {worst:.2e}"),
    ))
}

fn subproblem_check(tol: &SelftestTolerances) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e2);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_consistency: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(3..=6);
        let l = rng.random_range(1..n);
        let r = gaussian_psd(n, rng.random_range(1..=n), &mut rng);
        let d_i = random_vec(l, 2.0, &mut rng);
        let inst = SubproblemInstance::new(&r, d_i)?;
        let sol = solve_subproblem(&inst)?;
        let tail = n - l;
        let mut probe = |w: &ComplexVector| {
            let v = inst.objective(w);
            worst_excess = worst_excess.max((v - sol.lambda_star) / sol.lambda_star.abs().max(1.0));
        };
        for _ in 0..2000 {
            let scale = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
            probe(&random_vec(tail, scale, &mut rng));
        }
        let eig = herm_eig(&inst.r_j())?;
        probe(&eig.vector(0).scale(C64::new(1e6, 0.0)));
        if let Completion::Vector(w) = &sol.w_j {
            for _ in 0..200 {
                let step = 10f64.powf(-(rng.random::<f64>() * 6.0 + 1.0));
                let dw = random_vec(tail, step, &mut rng);
                probe(&w.iter().zip(dw.iter()).map(|(a, b)| a + b).collect());
            }
            if sol.case == SubproblemCase::Secular {
                let rel = (inst.objective(w) - sol.lambda_star).abs() / sol.lambda_star.abs().max(1e-300);
                worst_consistency = worst_consistency.max(rel);
            }
        }
    }
    let passed = worst_excess <= tol.subproblem_slack && worst_consistency <= tol.subproblem_consistency;
    Ok((
        passed,
        format!("max sampled excess {worst_excess:.2e}, max self-consistency error {worst_consistency:.2e}"),
    ))
}

fn bb_check(tol: &SelftestTolerances) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (l, bits, reps) in [(4, 1, 10), (5, 1, 10), (6, 1, 10), (4, 2, 10), (5, 2, 10)] {
        let alphabet = PhaseAlphabet::new(bits)?;
        for _ in 0..reps {
            let r = gaussian_psd(l, rng.random_range(1..=l), &mut rng);
            let (bb, _) = bb_bc(&r, 1, &alphabet, &BbOptions::default())?;
            let (ex, _) = exhaustive(&r, 1, &alphabet)?;
            let vb = rayleigh_quotient(&r, bb.column(0).as_slice());
            let ve = rayleigh_quotient(&r, ex.column(0).as_slice());
            worst = worst.max((vb - ve).abs() / ve.abs().max(1.0));
            count += 1;
        }
    }
    Ok((worst <= tol.bb_exact, format!("{count} instances, max gap {worst:.2e}")))
}

fn plugin_check(tol: &SelftestTolerances) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x71);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = 8;
        let r = gaussian_psd(n, n, &mut rng);
        let eig = herm_eig(&r)?;
        let all: Vec<usize> = (0..n).collect();
        for ns in [1, 3, 6] {
            let cols: Vec<usize> = (0..ns).collect();
            let f = eig.eigenvectors.submatrix(&all, &cols);
            let eta = efficiency(&f, &r, r.trace_re())?;
            let formula = eig.eigenvalues[..ns].iter().sum::<f64>() / eig.eigenvalues.iter().sum::<f64>();
            worst = worst.max((eta - formula).abs());
        }
    }
    Ok((worst <= tol.plugin_efficiency, format!("max deviation {worst:.2e}")))
}

fn deflation_check(tol: &SelftestTolerances) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xdef);
    let alphabet = PhaseAlphabet::new(2)?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let l = 8;
        let r = gaussian_psd(l, l, &mut rng);
        let idx: Vec<usize> = (0..l).map(|_| rng.random_range(0..4)).collect();
        let w = alphabet.vector(&idx);
        let a = ComplexMatrix::from_columns(std::slice::from_ref(&w))?;
        let out = deflate_matrix(&r, &a);
        worst = worst.max(out.matvec(&w).norm() / r.frobenius_norm());
    }
    Ok((worst <= tol.deflation, format!("max relative residual {worst:.2e}")))
}
