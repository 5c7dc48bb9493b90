//! Acceptance suite. Every test prints one `PASS`/`FAIL` line and then
//! asserts, so a failing criterion fails the test target.
//!
//! Lines are written straight to the process stdout so they appear in the
//! log even when libtest captures output.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bscomp::beamspace::{beamspace_ccm, dft_operator, estimate_beam_count, leakage_profile};
use bscomp::channel::{ensemble_ccm, Ccm, CcmKind, MpcSet, Ray, UserGeometry, DEFAULT_SPACING};
use bscomp::combiner::{
    efficiency, optimal_unconstrained, solve_subproblem, Completion, PhaseAlphabet, SubproblemCase, SubproblemInstance,
};
use bscomp::harness::{prepare_trial, run_experiment, ExperimentConfig, Scheme, TrialRecord};
use bscomp::numerics::{herm_eig, solve_secular, ComplexMatrix, ComplexVector, SecularProblem, C64};
use bscomp::solvers::{bb_bc, exhaustive, BbOptions};

fn report(id: &str, name: &str, passed: bool, detail: &str, start: Instant) {
    let line = format!(
        "\ncriterion {id:<3} {name:<28} {} {detail} ({:.1} s)\n",
        if passed { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(passed, "criterion {id} ({name}) failed: {detail}");
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    // Box-Muller keeps the oracle independent of the crate's samplers.
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    let r = (-2.0 * u.ln()).sqrt();
    C64::new(
        r * (std::f64::consts::TAU * v).cos(),
        r * (std::f64::consts::TAU * v).sin(),
    ) / 2f64.sqrt()
}

fn random_psd(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, rank, |_, _| gaussian(rng));
    let mut r = g.mul(&g.adjoint());
    r.symmetrize();
    r
}

fn random_vec(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng) * scale).collect()
}

/// `x† R x / x† x` by direct summation.
fn rq_oracle(r: &ComplexMatrix, x: &[C64]) -> f64 {
    let n = x.len();
    let mut num = 0.0;
    for i in 0..n {
        let row = r.row(i);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            acc += row[j] * x[j];
        }
        num += (x[i].conj() * acc).re;
    }
    num / x.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn eta_of(records: &[TrialRecord], scheme: Scheme, bits: u32, k: usize) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.scheme == scheme && r.bits == bits && r.rf_chains == k)
        .map(|r| r.eta.unwrap_or(f64::NAN))
        .collect()
}

#[test]
fn criterion_01_optimal_combiner_consistency() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let n = 16;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..100 {
        let rs = random_psd(n, n, &mut rng);
        let eig_s = herm_eig(&rs).unwrap();
        let lambda_min = *eig_s.eigenvalues.last().unwrap();
        for sigma2 in [0.0, 0.5 * lambda_min] {
            let mut noisy = rs.clone();
            noisy.shift_diagonal(sigma2);
            let mut ccm = Ccm::new(noisy, CcmKind::Sample).unwrap();
            ccm.noise_variance = sigma2;
            let eig = herm_eig(&ccm.matrix).unwrap();
            for ns in [1, 4, 8] {
                let opt = optimal_unconstrained(&ccm, ns).unwrap();
                let eta = efficiency(&opt.combiner, &rs, rs.trace_re()).unwrap();
                let excess: Vec<f64> = eig.eigenvalues.iter().map(|l| l - sigma2).collect();
                let formula = excess[..ns].iter().sum::<f64>() / excess.iter().sum::<f64>();
                worst = worst.max((eta - formula).abs()).max((opt.eta - formula).abs());
                cases += 1;
            }
        }
    }
    report(
        "1",
        "optimal-combiner",
        worst <= 1e-9,
        &format!("{cases} cases, max deviation {worst:.2e}"),
        start,
    );
}

#[test]
fn criterion_02_subproblem_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_consistency: f64 = 0.0;
    let mut secular_cases = 0;
    let mut points = 0usize;
    for instance in 0..500 {
        // The first 50 instances use the 3-dimensional, scalar-prefix setting.
        let (n, l) = if instance < 50 {
            (3, 1)
        } else {
            let l = rng.random_range(1..=4);
            (l + rng.random_range(1..=5), l)
        };
        let tail = n - l;
        let r = random_psd(n, rng.random_range(1..=n), &mut rng);
        let d_i = ComplexVector(random_vec(l, 1.0, &mut rng));
        let inst = SubproblemInstance::new(&r, d_i.clone()).unwrap();
        let sol = solve_subproblem(&inst).unwrap();
        let scale = sol.lambda_star.abs().max(1.0);
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[..l].copy_from_slice(d_i.as_slice());
        let mut probe = |w: &[C64]| {
            x[l..].copy_from_slice(w);
            worst_excess = worst_excess.max((rq_oracle(&r, &x) - sol.lambda_star) / scale);
        };
        let eig = herm_eig(&inst.r_j()).unwrap();
        let u = eig.vector(0);
        for beta in [1e3, 1e6] {
            probe(&u.iter().map(|z| z * beta).collect::<Vec<_>>());
            probe(&u.iter().map(|z| -z * beta).collect::<Vec<_>>());
        }
        let centre = match &sol.w_j {
            Completion::Vector(w) => Some(w.as_slice().to_vec()),
            _ => None,
        };
        let refinements = if centre.is_some() { 40_000 } else { 0 };
        for _ in 0..(100_000 - 4 - refinements) {
            let s = 10f64.powf(rng.random::<f64>() * 8.0 - 4.0);
            probe(&random_vec(tail, s, &mut rng));
        }
        if let Some(w) = &centre {
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
            for _ in 0..refinements {
                let step = norm * 10f64.powf(-(rng.random::<f64>() * 8.0));
                let dw = random_vec(tail, step, &mut rng);
                probe(&w.iter().zip(&dw).map(|(a, b)| a + b).collect::<Vec<_>>());
            }
        }
        points += 100_000;
        if let (SubproblemCase::Secular, Some(w)) = (sol.case, &centre) {
            x[l..].copy_from_slice(w);
            let rel = (rq_oracle(&r, &x) - sol.lambda_star).abs() / sol.lambda_star.abs().max(1e-300);
            worst_consistency = worst_consistency.max(rel);
            secular_cases += 1;
        }
    }
    let passed = worst_excess <= 1e-9 && worst_consistency <= 1e-8;
    report(
        "2",
        "subproblem-optimality",
        passed,
        &format!(
            "{points} points, max excess {worst_excess:.2e}; {secular_cases} secular cases, max self-consistency {worst_consistency:.2e}"
        ),
        start,
    );
}

#[test]
fn criterion_03_secular_solver() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for p in 0..10_000 {
        // Even problems come from sub-problem instances; odd ones are synthetic
        // with the same scaling, weights ~ d·λ², and optional pole clusters.
        let (poles, weights, d, r) = if p % 2 == 0 {
            let n = rng.random_range(2..=9);
            let l = rng.random_range(1..n);
            let scale = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
            let rm = random_psd(n, rng.random_range(1..=n), &mut rng).scale(scale);
            let inst = SubproblemInstance::new(&rm, ComplexVector(random_vec(l, 1.0, &mut rng))).unwrap();
            let eig = herm_eig(&inst.r_j()).unwrap();
            let weights: Vec<f64> = (0..eig.dim())
                .map(|i| {
                    eig.vector(i)
                        .iter()
                        .zip(inst.p())
                        .map(|(u, q)| u.conj() * q)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect();
            (eig.eigenvalues.clone(), weights, inst.d(), inst.r())
        } else {
            let n = rng.random_range(1..=8);
            let d = 10f64.powf(rng.random::<f64>() * 4.0 - 2.0);
            let spread = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
            let mut poles: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * spread).collect();
            if p % 3 == 0 && n > 1 {
                poles[1] = poles[0] * (1.0 - 1e-12);
            }
            poles.sort_by(|a, b| b.total_cmp(a));
            let weights: Vec<f64> = (0..n)
                .map(|_| d * spread * spread * 10f64.powf(rng.random::<f64>() * 4.0 - 4.0))
                .collect();
            let r = rng.random::<f64>() * spread * d * 2.0;
            (poles, weights, d, r)
        };
        let prob = SecularProblem::new(poles.clone(), weights.clone(), d, r).unwrap();
        let lambda = solve_secular(&prob).unwrap();
        let l1 = poles[0];
        let total: f64 = weights.iter().sum();
        let upper = (d * l1 + r + ((d * l1 - r).powi(2) + 4.0 * d * total).sqrt()) / (2.0 * d);
        if !(lambda > l1 && lambda <= upper) {
            outside += 1;
        }
        let f = lambda * d - r - poles.iter().zip(&weights).map(|(p, w)| w / (lambda - p)).sum::<f64>();
        worst = worst.max(f.abs() / (d * lambda).max(1.0));
    }
    report(
        "3",
        "secular-solver",
        worst <= 1e-10 && outside == 0,
        &format!("10000 problems, max scaled residual {worst:.2e}, {outside} roots outside the interval"),
        start,
    );
}

fn beamspace_instance(beams: usize, trial: usize) -> ComplexMatrix {
    let cfg = ExperimentConfig {
        antennas: 32,
        beams,
        samples: 512,
        seed: 404,
        ..Default::default()
    };
    prepare_trial(&cfg, trial, 0).unwrap().beamspace.matrix
}

#[test]
fn criterion_04_bb_matches_exhaustive() {
    let start = Instant::now();
    let exact = BbOptions {
        epsilon: 0.0,
        node_budget: usize::MAX,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    let mut index_mismatch = 0;
    let mut count = 0;
    for (l, bits, reps) in [(6, 1, 100), (5, 2, 50)] {
        let alphabet = PhaseAlphabet::new(bits).unwrap();
        for t in 0..reps {
            let r = beamspace_instance(l, t);
            let k = 3;
            let (bb, bb_rep) = bb_bc(&r, k, &alphabet, &exact).unwrap();
            let (ex, ex_rep) = exhaustive(&r, k, &alphabet).unwrap();
            for c in 0..k {
                let (vb, ve) = (bb_rep.columns[c].rayleigh_quotient, ex_rep.columns[c].rayleigh_quotient);
                worst = worst.max((vb - ve).abs() / ve.abs().max(1.0));
                if bb.indices()[c] != ex.indices()[c] {
                    index_mismatch += 1;
                }
            }
            count += 1;
        }
    }
    report(
        "4",
        "bb-exactness",
        worst <= 1e-12 && index_mismatch == 0,
        &format!("{count} CCMs x 3 columns, max gap {worst:.2e}, {index_mismatch} index mismatches"),
        start,
    );
}

#[test]
fn criterion_05_bb_pruning() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        beams: 12,
        users: 2,
        snr_db: vec![20.0],
        seed: 505,
        ..Default::default()
    };
    let alphabet = PhaseAlphabet::new(2).unwrap();
    let exact = BbOptions {
        epsilon: 0.0,
        node_budget: usize::MAX,
        ..Default::default()
    };
    let nodes: Vec<f64> = (0..20)
        .map(|t| {
            let p = prepare_trial(&cfg, t, 0).unwrap();
            let (_, rep) = bb_bc(&p.beamspace, 1, &alphabet, &exact).unwrap();
            rep.columns[0].nodes_expanded as f64
        })
        .collect();
    let limit = 0.01 * 2f64.powi(22);
    let avg = mean(nodes.iter().copied());
    let max = nodes.iter().copied().fold(0.0, f64::max);
    report(
        "5",
        "bb-pruning",
        avg <= limit,
        &format!("mean nodes {avg:.0} (max {max:.0}) vs limit {limit:.0}"),
        start,
    );
}

#[test]
fn criterion_06_greedy_near_bb() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        beams: 12,
        rf_chains: vec![4],
        bits: vec![1, 2],
        scheme: vec![Scheme::Bbbc, Scheme::Sgbc],
        trials: 100,
        epsilon: 0.01,
        seed: 606,
        ..Default::default()
    };
    let records = run_experiment(&cfg).unwrap();
    let mut passed = true;
    let mut detail = Vec::new();
    for bits in [1, 2] {
        let sg = mean(eta_of(&records, Scheme::Sgbc, bits, 4));
        let bb = mean(eta_of(&records, Scheme::Bbbc, bits, 4));
        passed &= sg >= 0.95 * bb;
        detail.push(format!("B={bits}: sgbc {sg:.4} vs bbbc {bb:.4} (ratio {:.3})", sg / bb));
    }
    report("6", "greedy-near-bb", passed, &detail.join("; "), start);
}

#[test]
fn criterion_07_scheme_ordering() {
    let start = Instant::now();
    // Three-bit BB at exact gaps is out of reach in a test run; see README.
    let cfg = ExperimentConfig {
        bits: vec![1, 2],
        scheme: vec![Scheme::Optimal, Scheme::Bbbc, Scheme::Sgbc, Scheme::None],
        epsilon: 0.0,
        seed: 707,
        ..Default::default()
    };
    let records = run_experiment(&cfg).unwrap();
    let mut key: BTreeMap<(usize, Scheme, u32, usize), f64> = BTreeMap::new();
    for r in &records {
        key.insert((r.trial, r.scheme, r.bits, r.rf_chains), r.eta.unwrap_or(f64::NAN));
    }
    let get = |t, s, b, k| key[&(t, s, b, k)];
    let slack = 1e-9;
    let ok = |hi: f64, lo: f64| hi >= lo - slack;
    let (mut opt_bb, mut bb_sg, mut sg_none, mut errors, mut checks) = (0, 0, 0, 0, 0);
    for t in 0..cfg.trials {
        for &k in &cfg.rf_chains {
            let none = get(t, Scheme::None, 0, k);
            let opt = get(t, Scheme::Optimal, 0, k);
            for &b in &cfg.bits {
                let bb = get(t, Scheme::Bbbc, b, k);
                let sg = get(t, Scheme::Sgbc, b, k);
                checks += 1;
                // An errored record cannot be ordered; it is counted on its own.
                if bb.is_nan() || sg.is_nan() {
                    errors += 1;
                    continue;
                }
                opt_bb += usize::from(!ok(opt, bb));
                bb_sg += usize::from(!ok(bb, sg));
                sg_none += usize::from(!ok(sg, none));
            }
        }
    }
    let mut mean_violations = Vec::new();
    for &k in &cfg.rf_chains {
        let none = mean(eta_of(&records, Scheme::None, 0, k));
        for s in [Scheme::Bbbc, Scheme::Sgbc] {
            let b1 = mean(eta_of(&records, s, 1, k));
            let b2 = mean(eta_of(&records, s, 2, k));
            if !(ok(b2, b1) && ok(b1, none)) {
                mean_violations.push(format!("{s} K={k} ({b2:.3}/{b1:.3}/{none:.3})"));
            }
        }
    }
    let passed = opt_bb + bb_sg + sg_none + errors == 0 && mean_violations.is_empty();
    report(
        "7",
        "scheme-ordering",
        passed,
        &format!(
            "{checks} per-trial checks: optimal<bbbc {opt_bb}, bbbc<sgbc {bb_sg}, sgbc<none {sg_none}, \
             checks with a solver error {errors}; trial-mean B2>=B1>=none violated at [{}]",
            mean_violations.join(", ")
        ),
        start,
    );
}

#[test]
fn criterion_08_bit_resolution_deltas() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        antennas: 64,
        beams: 16,
        rf_chains: vec![6],
        bits: vec![1, 2, 3],
        scheme: vec![Scheme::None, Scheme::Sgbc],
        trials: 50,
        seed: 808,
        ..Default::default()
    };
    let records = run_experiment(&cfg).unwrap();
    let none = mean(eta_of(&records, Scheme::None, 0, 6));
    let e: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&b| mean(eta_of(&records, Scheme::Sgbc, b, 6)))
        .collect();
    let d1 = e[0] - none;
    let d2 = e[1] - e[0];
    let d3 = e[2] - e[1];
    let passed = (0.03..=0.25).contains(&d1) && d2 > 0.0 && d3 < d2;
    report(
        "8",
        "bit-resolution-deltas",
        passed,
        &format!(
            "none {none:.4}, B1 {:.4}, B2 {:.4}, B3 {:.4}; B1-none {d1:+.4}, B2-B1 {d2:+.4}, B3-B2 {d3:+.4}",
            e[0], e[1], e[2]
        ),
        start,
    );
}

#[test]
fn criterion_09_dft_leakage() {
    let start = Instant::now();
    let m = 16;
    // Broadside grid: beam sines (i - M/2)/(M/2) for i = 0..M.
    let mut worst_aligned = f64::INFINITY;
    for i in 1..m {
        let sine = (i as f64 - (m / 2) as f64) / (m as f64 / 2.0);
        let p = leakage_profile(sine.asin(), m).unwrap();
        worst_aligned = worst_aligned.min(p.iter().copied().fold(0.0, f64::max));
    }
    let p = leakage_profile(0.063, m).unwrap();
    let top = p.iter().copied().fold(0.0, f64::max);
    let above = p.iter().filter(|&&x| x > 0.01).count();
    // sinc² oracle for the offset ray.
    let offset = 0.063f64.sin() * m as f64 / 2.0;
    let oracle_top = {
        let x = std::f64::consts::PI * (offset - offset.round());
        let dirichlet = (m as f64 * x / m as f64).sin() / (m as f64 * (x / m as f64).sin());
        if x == 0.0 {
            1.0
        } else {
            dirichlet * dirichlet
        }
    };
    let passed = worst_aligned >= 0.999 && top < 0.95 && above >= 3 && (top - oracle_top).abs() < 1e-9;
    report(
        "9",
        "dft-leakage",
        passed,
        &format!("aligned min top {worst_aligned:.6}; 0.063 rad top {top:.4} (oracle {oracle_top:.4}), {above} beams above 1%"),
        start,
    );
}

#[test]
fn criterion_10_beam_count_estimate() {
    let start = Instant::now();
    let m = 1024;
    let (lo, hi) = (0.2, 0.4);
    let rays = 600;
    let geo = MpcSet::new(
        vec![UserGeometry {
            rays: (0..rays)
                .map(|i| Ray {
                    aoa: (lo + (hi - lo) * (i as f64 + 0.5) / rays as f64).asin(),
                    power: 1.0,
                })
                .collect(),
            angular_spread: (lo, hi),
        }],
        m,
        DEFAULT_SPACING,
    )
    .unwrap();
    let r = ensemble_ccm(&geo);
    let bs = beamspace_ccm(&dft_operator(m, DEFAULT_SPACING).unwrap(), &r).unwrap();
    let mut diag = bs.matrix.diagonal_re();
    diag.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = diag.iter().sum();
    let mut acc = 0.0;
    let count = diag
        .iter()
        .position(|&x| {
            acc += x;
            acc >= 0.99 * total
        })
        .unwrap()
        + 1;
    let est = estimate_beam_count(&[(lo, hi)], m).unwrap();
    let rel = (count as f64 - est).abs() / est;
    report(
        "10",
        "beam-count-estimate",
        rel <= 0.1,
        &format!("99% of power in {count} beams, estimate {est:.1}, relative gap {rel:.3}"),
        start,
    );
}

#[test]
fn criterion_10b_two_user_example() {
    let start = Instant::now();
    use std::f64::consts::PI;
    let m = 1024;
    let spreads = [((-PI / 3.0).sin(), (-PI / 6.0).sin()), (0.0, (PI / 4.0).sin())];
    let est = estimate_beam_count(&spreads, m).unwrap();
    let stated = 3f64.sqrt() / 4.0 * m as f64;
    // Independent arithmetic: the two intervals are disjoint.
    let union = (spreads[0].1 - spreads[0].0) + (spreads[1].1 - spreads[1].0);
    let oracle = m as f64 / 2.0 * union;
    report(
        "10b",
        "two-user-example",
        (est - stated).abs() <= 1e-9 * stated,
        &format!("estimate {est:.3} (union oracle {oracle:.3}) vs stated {stated:.3}"),
        start,
    );
}

#[test]
fn criterion_11_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "seed = 1111\ntrials = 4\nbits = 1,2\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_bscomp"))
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    report(
        "11",
        "determinism",
        a == b && lines > 1,
        &format!("{} bytes, {lines} lines, identical: {}", a.len(), a == b),
        start,
    );
}
