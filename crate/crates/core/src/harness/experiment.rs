use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{ExperimentConfig, Scheme};
use crate::beamspace::{beamspace_ccm, dft_operator, select_beams};
use crate::channel::{sample_ccm, sample_geometry, signal_ccm_estimate, Ccm, MpcSet, DEFAULT_SPACING};
use crate::combiner::{efficiency, CombinerMatrix, PhaseAlphabet};
use crate::error::Result;
use crate::numerics::herm_eig;
use crate::solvers::{bb_bc, exhaustive, sg_bc, BbOptions, SolverReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub scheme: Scheme,
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "L")]
    pub beams: usize,
    #[serde(rename = "K")]
    pub rf_chains: usize,
    /// Phase resolution; 0 for schemes without a phase shifter network.
    #[serde(rename = "B")]
    pub bits: u32,
    pub snr_db: f64,
    pub eta: Option<f64>,
    pub eta_opt: Option<f64>,
    pub nodes: usize,
    pub ms: f64,
    pub error: Option<String>,
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under `master`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    mix(mix(master) ^ trial as u64)
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ mix(index)))
}

/// One trial's inputs at one SNR, up to the selected-beam CCM.
#[derive(Debug, Clone)]
pub struct PreparedTrial {
    pub trial: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub geometry: MpcSet,
    /// Antenna-domain signal estimate `R̄_s`.
    pub signal: Ccm,
    /// Beamspace CCM restricted to the selected beams, strongest first.
    pub beamspace: Ccm,
    pub selected: Vec<usize>,
    /// `tr R̄_s`, the efficiency denominator.
    pub total_power: f64,
}

/// Geometry, sample CCM, signal estimate, DFT and beam selection for trial
/// `trial` at `cfg.snr_db[snr_index]`. The geometry depends only on the
/// trial seed; each SNR gets its own sampling stream.
pub fn prepare_trial(cfg: &ExperimentConfig, trial: usize, snr_index: usize) -> Result<PreparedTrial> {
    let seed = trial_seed(cfg.seed, trial);
    let snr_db = cfg.snr_db[snr_index];
    let geometry = sample_geometry(&cfg.channel(), &mut stream(seed, 0))?;
    let rt = sample_ccm(
        &geometry,
        cfg.samples,
        1,
        snr_db,
        &mut stream(seed, 1 + snr_index as u64),
    )?;
    let signal = signal_ccm_estimate(&rt)?;
    let op = dft_operator(cfg.antennas, DEFAULT_SPACING)?;
    let full = beamspace_ccm(&op, &signal)?;
    let selected = select_beams(&full, cfg.beams)?;
    let op = op.with_selection(selected.clone())?;
    let beamspace = beamspace_ccm(&op, &signal)?;
    let total_power = signal.trace();
    Ok(PreparedTrial {
        trial,
        seed,
        snr_db,
        geometry,
        signal,
        beamspace,
        selected,
        total_power,
    })
}

/// Run every trial and return records ordered by trial, then scheme name,
/// then SNR, bits and RF chains in configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cfg.trials);
    if workers <= 1 {
        return Ok((0..cfg.trials).flat_map(|t| run_trial(cfg, t)).collect());
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<TrialRecord>>>> = Mutex::new(vec![None; cfg.trials]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= cfg.trials {
                    break;
                }
                let recs = run_trial(cfg, t);
                slots.lock().expect("no panics while holding the lock")[t] = Some(recs);
            });
        }
    });
    Ok(slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .flat_map(|r| r.expect("every trial ran"))
        .collect())
}

/// All records of one trial. Failures become error-marked records.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Vec<TrialRecord> {
    let mut schemes = cfg.scheme.clone();
    schemes.sort();
    schemes.dedup();
    let seed = trial_seed(cfg.seed, trial);
    let prepared: Vec<Result<PreparedTrial>> = (0..cfg.snr_db.len()).map(|i| prepare_trial(cfg, trial, i)).collect();
    let optimal: Vec<Result<Vec<f64>>> = prepared
        .iter()
        .map(|p| match p {
            Ok(p) => optimal_curve(p, cfg.max_rf_chains()),
            Err(e) => Err(clone_err(e)),
        })
        .collect();

    let base = |scheme: Scheme, snr_db: f64, bits: u32, k: usize| TrialRecord {
        trial,
        seed,
        scheme,
        antennas: cfg.antennas,
        beams: cfg.beams,
        rf_chains: k,
        bits,
        snr_db,
        eta: None,
        eta_opt: None,
        nodes: 0,
        ms: 0.0,
        error: None,
    };

    let mut out = Vec::new();
    for &scheme in &schemes {
        for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
            let bit_list: &[u32] = if scheme.uses_alphabet() { &cfg.bits } else { &[0] };
            for &bits in bit_list {
                let rows = match (&prepared[si], &optimal[si]) {
                    (Ok(p), Ok(opt)) => evaluate(cfg, scheme, bits, p, opt),
                    (Err(e), _) | (_, Err(e)) => Err(clone_err(e)),
                };
                match rows {
                    Ok(rows) => {
                        for (k, row) in cfg.rf_chains.iter().zip(rows) {
                            let mut rec = base(scheme, snr_db, bits, *k);
                            rec.eta_opt = optimal[si].as_ref().ok().map(|o| o[k - 1]);
                            match row {
                                Ok((eta, nodes, time)) => {
                                    rec.eta = Some(eta);
                                    rec.nodes = nodes;
                                    if cfg.timing {
                                        rec.ms = time.as_secs_f64() * 1e3;
                                    }
                                }
                                Err(e) => rec.error = Some(e.to_string()),
                            }
                            out.push(rec);
                        }
                    }
                    Err(e) => {
                        for &k in &cfg.rf_chains {
                            let mut rec = base(scheme, snr_db, bits, k);
                            rec.eta_opt = optimal[si].as_ref().ok().map(|o| o[k - 1]);
                            rec.error = Some(e.to_string());
                            out.push(rec);
                        }
                    }
                }
            }
        }
    }
    out
}

type Row = Result<(f64, usize, Duration)>;

fn evaluate(cfg: &ExperimentConfig, scheme: Scheme, bits: u32, p: &PreparedTrial, opt: &[f64]) -> Result<Vec<Row>> {
    let r = &p.beamspace.matrix;
    let total = p.total_power;
    let k_max = cfg.max_rf_chains();
    match scheme {
        Scheme::Optimal => Ok(cfg
            .rf_chains
            .iter()
            .map(|&k| Ok((opt[k - 1], 0, Duration::ZERO)))
            .collect()),
        Scheme::None => {
            // selected beams are ordered strongest first
            let diag = r.diagonal_re();
            Ok(cfg
                .rf_chains
                .iter()
                .map(|&k| Ok((diag[..k].iter().sum::<f64>() / total, 0, Duration::ZERO)))
                .collect())
        }
        Scheme::Bbbc | Scheme::Sgbc | Scheme::Exhaustive => {
            let alphabet = PhaseAlphabet::new(bits)?;
            let (comb, report) = solve(scheme, r, k_max, &alphabet, cfg)?;
            Ok(cfg
                .rf_chains
                .iter()
                .map(|&k| prefix_row(&comb, &report, k, r, total))
                .collect())
        }
    }
}

/// Run one alphabet scheme for `k` columns.
pub fn solve(
    scheme: Scheme,
    r: &crate::numerics::ComplexMatrix,
    k: usize,
    alphabet: &PhaseAlphabet,
    cfg: &ExperimentConfig,
) -> Result<(CombinerMatrix, SolverReport)> {
    match scheme {
        Scheme::Bbbc => {
            let opts = BbOptions {
                epsilon: cfg.epsilon,
                node_budget: cfg.node_budget,
                corollary1_bound: cfg.corollary1,
                ..Default::default()
            };
            bb_bc(r, k, alphabet, &opts)
        }
        Scheme::Sgbc => sg_bc(r, k, alphabet),
        Scheme::Exhaustive => exhaustive(r, k, alphabet),
        Scheme::None | Scheme::Optimal => Err(crate::Error::NotApplicable("scheme has no discrete combiner")),
    }
}

fn prefix_row(
    comb: &CombinerMatrix,
    report: &SolverReport,
    k: usize,
    r: &crate::numerics::ComplexMatrix,
    total: f64,
) -> Row {
    let eta = efficiency(&comb.truncated(k).matrix(), r, total)?;
    let time = report.columns.iter().take(k).map(|c| c.wall_time).sum();
    Ok((eta, report.nodes_for(k), time))
}

/// `η_opt(K)` for `K = 1..=k_max`: the top-`K` eigenvalue mass of the
/// selected-beam CCM over the antenna-domain trace.
pub fn optimal_curve(p: &PreparedTrial, k_max: usize) -> Result<Vec<f64>> {
    let eig = herm_eig(&p.beamspace.matrix)?;
    let mut acc = 0.0;
    Ok(eig
        .eigenvalues
        .iter()
        .take(k_max)
        .map(|&l| {
            acc += l.max(0.0);
            acc / p.total_power
        })
        .collect())
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::Input(e.to_string())
}

/// Grid of experiments over antennas × users × beams, concatenated in that
/// nesting order.
pub fn run_sweep(
    base: &ExperimentConfig,
    antennas: &[usize],
    users: &[usize],
    beams: &[usize],
) -> Result<Vec<TrialRecord>> {
    let pick = |v: &[usize], d: usize| if v.is_empty() { vec![d] } else { v.to_vec() };
    let mut configs = Vec::new();
    for m in pick(antennas, base.antennas) {
        for n in pick(users, base.users) {
            for l in pick(beams, base.beams) {
                let mut cfg = base.clone();
                cfg.antennas = m;
                cfg.users = n;
                cfg.beams = l;
                cfg.validate()?;
                configs.push(cfg);
            }
        }
    }
    let mut out = Vec::new();
    for cfg in &configs {
        out.extend(run_experiment(cfg)?);
    }
    Ok(out)
}
