mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vshmem::config::RunConfig;
use vshmem::Design;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CALIBRATION: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "vshmem", version, about = "Spin Hall memory design simulator")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configured random seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Restricts the run to one design.
    #[arg(long, global = true, value_parser = parse_design)]
    pub design: Option<Design>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Switching time over the configured gate-voltage sweep.
    SweepSwitching,
    /// CiM truth tables from sensed currents.
    TruthTables,
    /// Normalized energy/latency comparison of the designs.
    Compare {
        #[arg(long, value_enum, default_value_t = ReadPolicyArg::IsoSm)]
        read_policy: ReadPolicyArg,
    },
    /// Spin-flip length or TLM fit of a two-column CSV.
    Fit {
        csv: PathBuf,
        #[arg(long, value_enum, default_value_t = FitKind::SpinFlip)]
        kind: FitKind,
        /// Channel width for TLM fits (µm).
        #[arg(long)]
        width_um: Option<f64>,
    },
    /// Workload trace energy in CiM and near-memory modes.
    Trace {
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = ReadPolicyArg::IsoSm)]
        read_policy: ReadPolicyArg,
    },
    /// In-memory ripple-carry addition.
    AddDemo {
        /// Operands, decimal or 0x-prefixed hex. Random pairs when omitted.
        #[arg(num_args = 0..=2)]
        words: Vec<String>,
        /// Number of random operand pairs.
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        cin: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadPolicyArg {
    IsoSm,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    SpinFlip,
    Tlm,
}

fn parse_design(s: &str) -> Result<Design, String> {
    s.parse().map_err(|e: vshmem::Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Calibration(String),
    Verification(String),
    Other(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Calibration(_) => EXIT_CALIBRATION,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Calibration(m) => write!(f, "calibration failed: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<vshmem::Error> for CliError {
    fn from(e: vshmem::Error) -> Self {
        match e {
            vshmem::Error::CalibrationFailure { .. } => CliError::Calibration(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn load_config(global: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(d) = global.design {
        cfg.designs = vec![d];
    }
    if cfg.designs.is_empty() {
        return Err(CliError::Usage("no designs selected".into()));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.global)?;
    let out = &cli.global.out;
    match cli.command {
        Command::SweepSwitching => commands::sweep_switching(&cfg, out),
        Command::TruthTables => commands::truth_tables(&cfg, cli.global.design, out),
        Command::Compare { read_policy } => commands::compare(&cfg, read_policy, out),
        Command::Fit { csv, kind, width_um } => commands::fit(&csv, kind, width_um, out),
        Command::Trace { trace, read_policy } => commands::trace(&cfg, &trace, read_policy, out),
        Command::AddDemo { words, count, cin } => {
            commands::add_demo(&cfg, cli.global.design, &words, count, cin, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vshmem: {e}");
            ExitCode::from(e.code())
        }
    }
}
