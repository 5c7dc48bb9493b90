//! Geometry-based multipath channels for a uniform linear array and their
//! correlation matrices.
//!
//! Each single-antenna user reaches the array through a handful of rays. A
//! channel draw is `h = √(M/U) Σ_r β_r α(θ_r)` with independent circular
//! Gaussian gains `β_r ~ CN(0, γ_r)`. The ensemble correlation replaces the
//! gains by their powers; the sample correlation averages `y y†` over
//! independent time/frequency samples with additive noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, ComplexMatrix, ComplexVector, C64};

/// Critical antenna spacing in wavelengths.
pub const DEFAULT_SPACING: f64 = 0.5;

/// Eigenvalues of a noise-subtracted CCM below `-CLAMP_TOL·‖R‖_F` trigger PSD
/// clamping.
const CLAMP_TOL: f64 = 1e-12;

/// Unit-norm ULA response `(1/√M)·exp(−j2π m (d/λ) sinθ)`,
/// `m ∈ {s − (M−1)/2 : s = 0..M−1}`.
pub fn steering(theta: f64, antennas: usize, spacing: f64) -> ComplexVector {
    steering_from_sine(theta.sin(), antennas, spacing)
}

/// Same as [`steering`] but parameterized by the directional sine.
pub fn steering_from_sine(sine: f64, antennas: usize, spacing: f64) -> ComplexVector {
    let scale = 1.0 / (antennas as f64).sqrt();
    let center = (antennas as f64 - 1.0) / 2.0;
    (0..antennas)
        .map(|s| {
            let m = s as f64 - center;
            C64::from_polar(scale, -2.0 * PI * m * spacing * sine)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Angle of arrival in radians.
    pub aoa: f64,
    /// Mean power `E|β|²`, linear.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    pub rays: Vec<Ray>,
    /// Angular spread as an interval of directional sines `[sin θ_min, sin θ_max]`.
    pub angular_spread: (f64, f64),
}

/// Multipath geometry of all users seen by an `antennas`-element ULA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSet {
    pub users: Vec<UserGeometry>,
    pub antennas: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl MpcSet {
    pub fn new(users: Vec<UserGeometry>, antennas: usize, spacing: f64) -> Result<Self> {
        let set = Self {
            users,
            antennas,
            spacing,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas < 2 {
            return Err(Error::Input(format!("need at least 2 antennas, got {}", self.antennas)));
        }
        if self.users.is_empty() {
            return Err(Error::Input("geometry has no users".into()));
        }
        for (n, user) in self.users.iter().enumerate() {
            if user.rays.is_empty() {
                return Err(Error::Input(format!("user {n} has no rays")));
            }
            let (lo, hi) = user.angular_spread;
            for ray in &user.rays {
                if !(ray.aoa.abs() < PI / 2.0) {
                    return Err(Error::Input(format!("user {n}: AoA {} outside (-π/2, π/2)", ray.aoa)));
                }
                if !(ray.power > 0.0) {
                    return Err(Error::Input(format!("user {n}: ray power must be positive")));
                }
                let s = ray.aoa.sin();
                if s < lo - 1e-12 || s > hi + 1e-12 {
                    return Err(Error::Input(format!("user {n}: ray outside its angular spread")));
                }
            }
        }
        Ok(())
    }

    pub fn total_rays(&self) -> usize {
        self.users.iter().map(|u| u.rays.len()).sum()
    }

    /// Per-user ray steering vectors.
    fn steering_table(&self) -> Vec<Vec<ComplexVector>> {
        self.users
            .iter()
            .map(|u| {
                u.rays
                    .iter()
                    .map(|r| steering(r.aoa, self.antennas, self.spacing))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerProfile {
    /// All rays of a user carry the same power.
    Equal,
    /// Ray `r` carries power proportional to `10^(−decay_db·r/10)`.
    Exponential { decay_db: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub antennas: usize,
    pub users: usize,
    pub rays_per_user: usize,
    /// Total angular spread of one user's rays, degrees.
    pub spread_deg: f64,
    /// Sector over which user mean AoAs are drawn, degrees.
    pub sector_deg: f64,
    pub spacing: f64,
    pub power_profile: PowerProfile,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            antennas: 64,
            users: 2,
            rays_per_user: 6,
            spread_deg: 45.0,
            sector_deg: 120.0,
            spacing: DEFAULT_SPACING,
            power_profile: PowerProfile::Equal,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas < 2 {
            return Err(Error::Config("antennas must be at least 2".into()));
        }
        if self.users == 0 {
            return Err(Error::Config("users must be at least 1".into()));
        }
        if self.rays_per_user == 0 {
            return Err(Error::Config("rays must be at least 1".into()));
        }
        if !(self.spread_deg >= 0.0) || !(self.sector_deg >= 0.0) {
            return Err(Error::Config("spread and sector must be non-negative".into()));
        }
        if self.rays_per_user > 1 && self.spread_deg == 0.0 {
            return Err(Error::Config("multiple rays need a positive spread".into()));
        }
        if (self.sector_deg + self.spread_deg) / 2.0 >= 90.0 {
            return Err(Error::Config(format!(
                "sector/2 + spread/2 = {}° reaches endfire",
                (self.sector_deg + self.spread_deg) / 2.0
            )));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Config("spacing must be positive".into()));
        }
        if let PowerProfile::Exponential { decay_db } = self.power_profile {
            if !decay_db.is_finite() {
                return Err(Error::Config("power decay must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Draw user mean AoAs uniformly over the sector and ray AoAs uniformly
/// within each user's spread around its mean. Ray powers are normalized so
/// that each user's powers average to one.
pub fn sample_geometry<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<MpcSet> {
    cfg.validate()?;
    let half_sector = cfg.sector_deg.to_radians() / 2.0;
    let half_spread = cfg.spread_deg.to_radians() / 2.0;
    let u = cfg.rays_per_user;

    let weights: Vec<f64> = match cfg.power_profile {
        PowerProfile::Equal => vec![1.0; u],
        PowerProfile::Exponential { decay_db } => (0..u).map(|r| 10f64.powf(-decay_db * r as f64 / 10.0)).collect(),
    };
    let wsum: f64 = weights.iter().sum();

    let mut users = Vec::with_capacity(cfg.users);
    for _ in 0..cfg.users {
        let mean = uniform(rng, -half_sector, half_sector);
        let rays = weights
            .iter()
            .map(|&w| Ray {
                aoa: uniform(rng, mean - half_spread, mean + half_spread),
                power: w * u as f64 / wsum,
            })
            .collect();
        users.push(UserGeometry {
            rays,
            angular_spread: ((mean - half_spread).sin(), (mean + half_spread).sin()),
        });
    }
    MpcSet::new(users, cfg.antennas, cfg.spacing)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn draw_channel<R: Rng + ?Sized>(geo: &MpcSet, table: &[Vec<ComplexVector>], rng: &mut R) -> ComplexMatrix {
    let m = geo.antennas;
    let mut h = ComplexMatrix::zeros(m, geo.users.len());
    for (n, user) in geo.users.iter().enumerate() {
        let amp = (m as f64 / user.rays.len() as f64).sqrt();
        for (ray, alpha) in user.rays.iter().zip(&table[n]) {
            let beta = complex_gaussian(rng, ray.power) * amp;
            for i in 0..m {
                h[(i, n)] += beta * alpha[i];
            }
        }
    }
    h
}

/// One channel realization `H` (M × users) with fresh ray gains.
pub fn realize_channel<R: Rng + ?Sized>(geo: &MpcSet, rng: &mut R) -> ComplexMatrix {
    draw_channel(geo, &geo.steering_table(), rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CcmKind {
    Ensemble,
    Sample,
    SignalEstimate,
}

/// Channel correlation matrix and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccm {
    pub matrix: ComplexMatrix,
    pub kind: CcmKind,
    /// Number of averaged samples; zero for ensemble matrices.
    pub sample_count: usize,
    pub noise_variance: f64,
}

impl Ccm {
    pub fn new(matrix: ComplexMatrix, kind: CcmKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("CCM must be square".into()));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        if !matrix.is_hermitian(1e-10) {
            return Err(Error::Input("CCM is not Hermitian".into()));
        }
        Ok(Self {
            matrix,
            kind,
            sample_count: 0,
            noise_variance: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace_re()
    }
}

impl AsRef<ComplexMatrix> for Ccm {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `R_t = Σ_n (M/U_n) Σ_r γ_{n,r} α(θ_{n,r}) α(θ_{n,r})†`.
pub fn ensemble_ccm(geo: &MpcSet) -> Ccm {
    let m = geo.antennas;
    let mut r = ComplexMatrix::zeros(m, m);
    for (user, alphas) in geo.users.iter().zip(geo.steering_table()) {
        let scale = m as f64 / user.rays.len() as f64;
        for (ray, alpha) in user.rays.iter().zip(&alphas) {
            let g = scale * ray.power;
            for i in 0..m {
                let ai = alpha[i] * g;
                for j in i..m {
                    r[(i, j)] += ai * alpha[j].conj();
                }
            }
        }
    }
    mirror_upper(&mut r);
    Ccm {
        matrix: r,
        kind: CcmKind::Ensemble,
        sample_count: 0,
        noise_variance: 0.0,
    }
}

fn mirror_upper(r: &mut ComplexMatrix) {
    let n = r.rows();
    for i in 0..n {
        r[(i, i)] = C64::new(r[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            r[(j, i)] = r[(i, j)].conj();
        }
    }
}

/// Noise variance for a per-antenna received SNR in dB. Infinite SNR gives
/// zero noise.
pub fn noise_variance(geo: &MpcSet, snr_db: f64) -> f64 {
    let per_antenna: f64 = geo
        .users
        .iter()
        .map(|u| u.rays.iter().map(|r| r.power).sum::<f64>() / u.rays.len() as f64)
        .sum();
    per_antenna / 10f64.powf(snr_db / 10.0)
}

/// Sample correlation `(1/(T·Lf)) Σ y y†` with `y = H x + n`, a fresh
/// channel per sample, unit-modulus QPSK symbols and `CN(0, σ²)` noise.
pub fn sample_ccm<R: Rng + ?Sized>(geo: &MpcSet, t: usize, lf: usize, snr_db: f64, rng: &mut R) -> Result<Ccm> {
    let samples = t * lf;
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    geo.validate()?;
    let m = geo.antennas;
    let sigma2 = noise_variance(geo, snr_db);
    let table = geo.steering_table();
    let qpsk = [
        C64::from_polar(1.0, PI / 4.0),
        C64::from_polar(1.0, 3.0 * PI / 4.0),
        C64::from_polar(1.0, 5.0 * PI / 4.0),
        C64::from_polar(1.0, 7.0 * PI / 4.0),
    ];

    let mut acc = ComplexMatrix::zeros(m, m);
    let mut y = vec![C64::new(0.0, 0.0); m];
    let mut symbols = vec![C64::new(0.0, 0.0); geo.users.len()];
    for _ in 0..samples {
        let h = draw_channel(geo, &table, rng);
        for x in symbols.iter_mut() {
            *x = qpsk[rng.random_range(0..4)];
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = h.row(i).iter().zip(&symbols).map(|(a, b)| a * b).sum();
        }
        if sigma2 > 0.0 {
            for yi in y.iter_mut() {
                *yi += complex_gaussian(rng, sigma2);
            }
        }
        for i in 0..m {
            let yi = y[i];
            for j in i..m {
                acc[(i, j)] += yi * y[j].conj();
            }
        }
    }
    mirror_upper(&mut acc);
    Ok(Ccm {
        matrix: acc.scale(1.0 / samples as f64),
        kind: CcmKind::Sample,
        sample_count: samples,
        noise_variance: sigma2,
    })
}

/// `R̄_s = R̄_t − σ²I`, clamped to the PSD cone when the subtraction leaves
/// negative eigenvalues.
pub fn signal_ccm_estimate(rt: &Ccm) -> Result<Ccm> {
    if rt.kind != CcmKind::Sample {
        return Err(Error::Input(format!("expected a sample CCM, got {:?}", rt.kind)));
    }
    let mut rs = rt.matrix.clone();
    rs.shift_diagonal(-rt.noise_variance);
    let norm = rs.frobenius_norm();
    let eig = herm_eig(&rs)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -CLAMP_TOL * norm {
        let mut clamped = eig;
        for l in clamped.eigenvalues.iter_mut() {
            *l = l.max(0.0);
        }
        rs = clamped.reconstruct();
    }
    Ok(Ccm {
        matrix: rs,
        kind: CcmKind::SignalEstimate,
        sample_count: rt.sample_count,
        noise_variance: rt.noise_variance,
    })
}
