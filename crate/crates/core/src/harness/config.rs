use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, PowerProfile, DEFAULT_SPACING};
use crate::combiner::MAX_BITS;
use crate::error::{Error, Result};
use crate::solvers::DEFAULT_NODE_BUDGET;

/// Compression schemes. The derived order is the lexicographic order of the
/// names, which is the row order of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bbbc,
    Exhaustive,
    None,
    Optimal,
    Sgbc,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Bbbc,
        Scheme::Exhaustive,
        Scheme::None,
        Scheme::Optimal,
        Scheme::Sgbc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Bbbc => "bbbc",
            Scheme::Exhaustive => "exhaustive",
            Scheme::None => "none",
            Scheme::Optimal => "optimal",
            Scheme::Sgbc => "sgbc",
        }
    }

    /// Whether the scheme uses the phase shifter network (and so a bit sweep).
    pub fn uses_alphabet(self) -> bool {
        matches!(self, Scheme::Bbbc | Scheme::Exhaustive | Scheme::Sgbc)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub antennas: usize,
    pub users: usize,
    pub rays: usize,
    /// Total angular spread of one user's rays, degrees.
    pub spread: f64,
    /// Sector over which user directions are drawn, degrees.
    pub sector: f64,
    pub beams: usize,
    pub rf_chains: Vec<usize>,
    pub bits: Vec<u32>,
    pub snr_db: Vec<f64>,
    /// `T × Lf` snapshots per sample CCM.
    pub samples: usize,
    pub trials: usize,
    pub seed: u64,
    pub scheme: Vec<Scheme>,
    pub epsilon: f64,
    pub node_budget: usize,
    pub corollary1: bool,
    /// Record wall time in the `ms` column. Off by default because timings
    /// make reports non-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            antennas: 64,
            users: 2,
            rays: 6,
            spread: 45.0,
            sector: 120.0,
            beams: 16,
            rf_chains: (2..=12).collect(),
            bits: vec![1, 2, 3],
            snr_db: vec![0.0],
            samples: 2048,
            trials: 50,
            seed: 1,
            scheme: vec![Scheme::Bbbc, Scheme::None, Scheme::Optimal, Scheme::Sgbc],
            epsilon: 0.01,
            node_budget: DEFAULT_NODE_BUDGET,
            corollary1: false,
            timing: false,
        }
    }
}

const KEYS: &[&str] = &[
    "antennas",
    "users",
    "rays",
    "spread",
    "sector",
    "beams",
    "rf_chains",
    "bits",
    "snr_db",
    "samples",
    "trials",
    "seed",
    "scheme",
    "epsilon",
    "node_budget",
    "corollary1",
    "timing",
];

impl ExperimentConfig {
    /// The larger array and beam count of the full-scale setting.
    pub fn full_scale() -> Self {
        Self {
            antennas: 128,
            beams: 32,
            rf_chains: (2..=16).collect(),
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::default()),
            "full" => Ok(Self::full_scale()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected desk or full)"
            ))),
        }
    }

    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig {
            antennas: self.antennas,
            users: self.users,
            rays_per_user: self.rays,
            spread_deg: self.spread,
            sector_deg: self.sector,
            spacing: DEFAULT_SPACING,
            power_profile: PowerProfile::Equal,
        }
    }

    pub fn max_rf_chains(&self) -> usize {
        self.rf_chains.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel().validate()?;
        if self.beams == 0 || self.beams > self.antennas {
            return Err(Error::Config(format!("need 1 ≤ beams ≤ antennas, got {}", self.beams)));
        }
        if self.rf_chains.is_empty() {
            return Err(Error::Config("rf_chains is empty".into()));
        }
        if let Some(&k) = self.rf_chains.iter().find(|&&k| k == 0 || k > self.beams) {
            return Err(Error::Config(format!(
                "need 1 ≤ rf_chains ≤ beams = {}, got {k}",
                self.beams
            )));
        }
        if self.scheme.is_empty() {
            return Err(Error::Config("scheme list is empty".into()));
        }
        if self.scheme.iter().any(|s| s.uses_alphabet()) && self.bits.is_empty() {
            return Err(Error::Config("bits is empty".into()));
        }
        if let Some(&b) = self.bits.iter().find(|&&b| b == 0 || b > MAX_BITS) {
            return Err(Error::Config(format!("bits must be 1..={MAX_BITS}, got {b}")));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db needs finite values".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be ≥ 0, got {}", self.epsilon)));
        }
        if self.node_budget == 0 {
            return Err(Error::Config("node_budget must be positive".into()));
        }
        Ok(())
    }

    /// Set one key from its text value. `-` and `_` are interchangeable in
    /// keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        let bad = |what: &str| Error::Config(format!("{key}: cannot parse `{v}` as {what}"));
        match key.as_str() {
            "antennas" => self.antennas = v.parse().map_err(|_| bad("a count"))?,
            "users" => self.users = v.parse().map_err(|_| bad("a count"))?,
            "rays" | "rays_per_user" => self.rays = v.parse().map_err(|_| bad("a count"))?,
            "spread" | "spread_deg" => self.spread = v.parse().map_err(|_| bad("degrees"))?,
            "sector" | "sector_deg" => self.sector = v.parse().map_err(|_| bad("degrees"))?,
            "beams" => self.beams = v.parse().map_err(|_| bad("a count"))?,
            "rf_chains" => self.rf_chains = parse_list(v).ok_or_else(|| bad("a list of counts"))?,
            "bits" => self.bits = parse_list(v).ok_or_else(|| bad("a list of bit counts"))?,
            "snr_db" => self.snr_db = parse_list(v).ok_or_else(|| bad("a list of numbers"))?,
            "samples" => self.samples = v.parse().map_err(|_| bad("a count"))?,
            "trials" => self.trials = v.parse().map_err(|_| bad("a count"))?,
            "seed" | "master_seed" => self.seed = v.parse().map_err(|_| bad("an unsigned integer"))?,
            "scheme" | "schemes" => {
                self.scheme = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "epsilon" => self.epsilon = v.parse().map_err(|_| bad("a number"))?,
            "node_budget" => self.node_budget = v.parse().map_err(|_| bad("a count"))?,
            "corollary1" | "use_corollary1_bound" => self.corollary1 = parse_bool(v).ok_or_else(|| bad("a boolean"))?,
            "timing" => self.timing = parse_bool(v).ok_or_else(|| bad("a boolean"))?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored; `preset = full` resets to a preset first.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: n + 1,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            if key.trim() == "preset" {
                *self = Self::preset(value.trim())?;
                continue;
            }
            self.set(key, value).map_err(|e| Error::Parse {
                line: n + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// `key = value` lines that [`apply_text`](Self::apply_text) reads back
    /// to an equal config.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("antennas", self.antennas.to_string());
        line("users", self.users.to_string());
        line("rays", self.rays.to_string());
        line("spread", self.spread.to_string());
        line("sector", self.sector.to_string());
        line("beams", self.beams.to_string());
        line(
            "rf_chains",
            join(self.rf_chains.iter().map(|k| k.to_string()).collect()),
        );
        line("bits", join(self.bits.iter().map(|k| k.to_string()).collect()));
        line("snr_db", join(self.snr_db.iter().map(|k| k.to_string()).collect()));
        line("samples", self.samples.to_string());
        line("trials", self.trials.to_string());
        line("seed", self.seed.to_string());
        line("scheme", join(self.scheme.iter().map(|k| k.to_string()).collect()));
        line("epsilon", self.epsilon.to_string());
        line("node_budget", self.node_budget.to_string());
        line("corollary1", self.corollary1.to_string());
        line("timing", self.timing.to_string());
        out
    }
}

/// Comma-separated values; integer ranges may be written `a..=b`.
/// Returns `None` if any item fails to parse.
pub fn parse_list<T: FromStr>(text: &str) -> Option<Vec<T>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..=") {
            let a: u64 = a.trim().parse().ok()?;
            let b: u64 = b.trim().parse().ok()?;
            if a > b {
                return None;
            }
            for v in a..=b {
                out.push(v.to_string().parse().ok()?);
            }
        } else {
            out.push(part.parse().ok()?);
        }
    }
    Some(out)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}
