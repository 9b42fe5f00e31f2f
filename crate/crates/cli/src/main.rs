//! `anneal`: batch front end for landscape analysis, simulation and bounds.

mod commands;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;

use anneal::{Engine, Schedule};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "anneal", version, about = "Classical and boosted simulated annealing on finite landscapes")]
struct Cli {
    /// Worker threads for replica ensembles (0 uses every core, 1 runs serially).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constants, hill-climbing constants, gap certificate and gap table as JSON.
    Analyze(AnalyzeArgs),
    /// Ensemble simulation; checkpoint metrics as CSV.
    Simulate(SimulateArgs),
    /// Empirical miss and escape probabilities against their bounds as CSV.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// Landscape JSON file.
    #[arg(long)]
    landscape: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Temperatures for the gap table.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0, 4.0])]
    temperatures: Vec<f64>,
    /// Schedule to audit against the admissibility conditions.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Cooling schedule literal, e.g. `log:c=1.5` or `power:alpha=0.5`.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<Schedule>,
    #[arg(long, value_enum, default_value_t = EngineArg::Direct)]
    engine: EngineArg,
    /// Initial state name.
    #[arg(long)]
    x0: String,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Horizon; defaults to the last checkpoint.
    #[arg(long)]
    t1: Option<f64>,
    /// Increasing checkpoint times; defaults to `t1`.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    replicas: u64,
    /// Seed base, decimal or `0x` hexadecimal.
    #[arg(long, env = "ANNEAL_SEED", value_parser = parse_seed, default_value = "0")]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    /// Writes replica 0 of each variant as `variant,time,state` rows.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    run: RunArgs,
    /// Margin below delta for the classical escape schedule.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    M1,
    M2,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineArg {
    Direct,
    Uniformized,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Direct => Engine::Direct,
            EngineArg::Uniformized => Engine::Uniformized,
        }
    }
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.parse::<Schedule>().map_err(|e| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

/// Failure carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Runtime(String),
}

impl From<anneal::Error> for Failure {
    fn from(e: anneal::Error) -> Self {
        use anneal::Error::*;
        match e {
            TemperatureTooLow { .. } | Representability(_) | Numerical(_) => Failure::Runtime(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Analyze(args) => commands::analyze(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Bounds(args) => commands::bounds(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_accept_hex() {
        assert_eq!(parse_seed("0x1F"), Ok(31));
        assert_eq!(parse_seed("42"), Ok(42));
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
