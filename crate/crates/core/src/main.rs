use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bscomp::channel::{Ccm, CcmKind};
use bscomp::combiner::{efficiency, PhaseAlphabet};
use bscomp::harness::{
    emit_report, parse_list, read_ccm, run_experiment, run_sweep, selftest, solve, write_report, ExperimentConfig,
    ReportFormat, Scheme, SelftestTolerances, TrialRecord,
};
use bscomp::Error;

#[derive(Parser)]
#[command(
    name = "bscomp",
    version,
    about = "Discrete beam combination for beamspace massive MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte Carlo experiment and write a report.
    Simulate(Overrides),
    /// Solve one CCM read from a text matrix file.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run `simulate` over a grid; --antennas, --users and --beams take lists.
    Sweep(Overrides),
    /// Run the embedded invariant checks.
    Selftest,
}

#[derive(Args, Default)]
struct Overrides {
    /// key = value configuration file, applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a preset (desk or full).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    rf_chains: Option<String>,
    #[arg(long)]
    beams: Option<String>,
    #[arg(long)]
    antennas: Option<String>,
    #[arg(long)]
    users: Option<String>,
    #[arg(long)]
    rays: Option<String>,
    #[arg(long)]
    spread: Option<String>,
    #[arg(long)]
    sector: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    node_budget: Option<String>,
    /// Tighten bounds with the quantization-aware estimate (not certified).
    #[arg(long)]
    corollary1: bool,
    /// Record wall time in the `ms` column (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

enum Failure {
    Config(Error),
    Runtime(Error),
    Selftest,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

impl Overrides {
    /// Build the config. Keys listed in `skip` are handled by the caller.
    fn config(&self, skip: &[&str]) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.preset {
            Some(p) => ExperimentConfig::preset(p).map_err(Failure::Config)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(Error::Config(format!("{}: {e}", path.display()))))?;
            cfg.apply_text(&text).map_err(Failure::Config)?;
        }
        let pairs = [
            ("seed", &self.seed),
            ("scheme", &self.scheme),
            ("bits", &self.bits),
            ("rf_chains", &self.rf_chains),
            ("beams", &self.beams),
            ("antennas", &self.antennas),
            ("users", &self.users),
            ("rays", &self.rays),
            ("spread", &self.spread),
            ("sector", &self.sector),
            ("samples", &self.samples),
            ("trials", &self.trials),
            ("snr_db", &self.snr_db),
            ("epsilon", &self.epsilon),
            ("node_budget", &self.node_budget),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                if !skip.contains(&key) {
                    cfg.set(key, v).map_err(Failure::Config)?;
                }
            }
        }
        cfg.corollary1 |= self.corollary1;
        cfg.timing |= self.timing;
        Ok(cfg)
    }

    fn format(&self) -> Result<ReportFormat, Failure> {
        self.format.parse().map_err(Failure::Config)
    }
}

fn write_records(records: &[TrialRecord], out: Option<&Path>, format: ReportFormat) -> Result<(), Failure> {
    match out {
        Some(path) => emit_report(records, path, format)?,
        None => {
            let stdout = std::io::stdout();
            write_report(records, format, stdout.lock()).map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn simulate(o: &Overrides) -> Result<(), Failure> {
    let cfg = o.config(&[])?;
    cfg.validate().map_err(Failure::Config)?;
    let format = o.format()?;
    let records = run_experiment(&cfg)?;
    write_records(&records, o.out.as_deref(), format)
}

fn sweep(o: &Overrides) -> Result<(), Failure> {
    let axes = ["antennas", "users", "beams"];
    let cfg = o.config(&axes)?;
    let list = |key: &str, v: &Option<String>| -> Result<Vec<usize>, Failure> {
        match v {
            Some(text) => parse_list(text)
                .ok_or_else(|| Failure::Config(Error::Config(format!("{key}: cannot parse `{text}` as a list")))),
            None => Ok(Vec::new()),
        }
    };
    let antennas = list("antennas", &o.antennas)?;
    let users = list("users", &o.users)?;
    let beams = list("beams", &o.beams)?;
    let format = o.format()?;
    let records = run_sweep(&cfg, &antennas, &users, &beams)?;
    write_records(&records, o.out.as_deref(), format)
}

fn solve_file(input: &Path, o: &Overrides) -> Result<(), Failure> {
    let mut cfg = o.config(&[])?;
    if o.scheme.is_none() {
        cfg.scheme = vec![Scheme::Bbbc];
    }
    if o.epsilon.is_none() {
        cfg.epsilon = 0.0;
    }
    let scheme = match cfg.scheme.as_slice() {
        [s] if s.uses_alphabet() => *s,
        _ => {
            return Err(Failure::Config(Error::Config(
                "solve takes exactly one of bbbc, sgbc, exhaustive".into(),
            )))
        }
    };
    let (&k, &bits) = match (cfg.rf_chains.as_slice(), cfg.bits.as_slice()) {
        ([k], [b]) => (k, b),
        _ if o.rf_chains.is_none() || o.bits.is_none() => {
            return Err(Failure::Config(Error::Config(
                "solve needs --rf-chains K and --bits B".into(),
            )))
        }
        _ => return Err(Failure::Config(Error::Config("solve takes a single K and B".into()))),
    };
    let matrix = read_ccm(input).map_err(|e| match e {
        Error::Io { .. } => Failure::Runtime(e),
        other => Failure::Config(other),
    })?;
    let ccm = Ccm::new(matrix, CcmKind::SignalEstimate)?;
    let alphabet = PhaseAlphabet::new(bits).map_err(Failure::Config)?;
    let (comb, _) = solve(scheme, &ccm.matrix, k, &alphabet, &cfg)?;
    let eta = efficiency(&comb.matrix(), &ccm.matrix, ccm.trace())?;
    let mut text = String::new();
    for col in comb.indices() {
        let row: Vec<String> = col.iter().map(|n| n.to_string()).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text.push_str(&format!("eta {eta}\n"));
    match &o.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(o) => simulate(o),
        Command::Sweep(o) => sweep(o),
        Command::Solve { input, overrides } => solve_file(input, overrides),
        Command::Selftest => {
            let summary = selftest(&SelftestTolerances::default());
            println!("{summary}");
            if summary.passed() {
                Ok(())
            } else {
                Err(Failure::Selftest)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("bscomp: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("bscomp: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Selftest) => ExitCode::from(3),
    }
}
