//! `afrelay`: coefficient tables, Bessel comparisons, distribution and
//! performance sweeps, and the validation report.
//!
//! Exit codes: 0 success, 1 failed validation or I/O error, 2 usage or domain
//! error, 3 numerical failure.

mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::grid::{parse_grid, parse_usize_list};
use crate::output::{Format, Sink};

#[derive(Debug, Parser)]
#[command(name = "afrelay", version, about = "Series-based analysis of a two-hop amplify-and-forward relay link")]
struct Cli {
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncated-series coefficients a_{nu,k,q} for q = 0..k.
    Coeffs(CoeffsArgs),
    /// Series K_nu(beta x) against the quadrature reference.
    Bessel(BesselArgs),
    /// CDF and density of the MRC output power.
    Dist(DistArgs),
    /// Outage, BEP and ergodic capacity over a transmit-SNR grid.
    Perf(PerfArgs),
    /// Runs the validation criteria and writes the report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffsFormat {
    Csv,
    Json,
    /// One column per depth, rounded to four significant digits.
    Table1,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub nu: f64,
    /// Truncation depths, comma separated.
    #[arg(long, default_value = "10", value_parser = parse_usize_list)]
    pub k: std::vec::Vec<usize>,
    #[arg(long, value_enum, default_value_t = CoeffsFormat::Csv)]
    pub format: CoeffsFormat,
}

#[derive(Debug, Args)]
pub struct BesselArgs {
    /// Order; 0 uses the K_0 recurrence.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value = "2,10", value_parser = parse_usize_list)]
    pub k: std::vec::Vec<usize>,
    #[arg(long, default_value = "0.5,1,2", value_parser = parse_grid)]
    pub beta: std::vec::Vec<f64>,
    /// `a,b,c` or `lo:hi:n`.
    #[arg(long, default_value = "0.5:8:31", value_parser = parse_grid, allow_hyphen_values = true)]
    pub x: std::vec::Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda_sd: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_sr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_rd: f64,
    /// Series truncation depth.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Transmit SNR in dB.
    #[arg(long, default_value_t = 30.0, conflicts_with = "gamma_linear", allow_negative_numbers = true)]
    pub gamma_db: f64,
    /// Transmit SNR, linear.
    #[arg(long)]
    pub gamma_linear: Option<f64>,
    #[arg(long, default_value = "0:8:81", value_parser = parse_grid)]
    pub x: std::vec::Vec<f64>,
    /// Adds a Monte Carlo histogram density column.
    #[arg(long)]
    pub with_mc: bool,
    /// Adds the min-bound baseline density column.
    #[arg(long)]
    pub with_minbound: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    /// Histogram bins on [0, --hist-max).
    #[arg(long, default_value_t = 160)]
    pub bins: usize,
    #[arg(long, default_value_t = 8.0)]
    pub hist_max: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum PerfMetric {
    Outage,
    Bep,
    Capacity,
}

#[derive(Debug, Args)]
pub struct PerfArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Transmit SNR grid in dB.
    #[arg(long, default_value = "-5:35:9", value_parser = parse_grid, allow_hyphen_values = true, conflicts_with = "gamma_linear")]
    pub gamma_db: std::vec::Vec<f64>,
    /// Transmit SNR grid, linear; 0 is allowed.
    #[arg(long, value_parser = parse_grid)]
    pub gamma_linear: Option<std::vec::Vec<f64>>,
    /// Outage threshold on the output SNR, dB.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub threshold_db: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "outage,bep,capacity")]
    pub metrics: Vec<PerfMetric>,
    /// Adds Monte Carlo columns with standard errors.
    #[arg(long)]
    pub with_mc: bool,
    /// Relays in the simulation; closed forms are single-relay.
    #[arg(long, default_value_t = 1)]
    pub relays: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Capacity in bits/s/Hz instead of nats/s/Hz.
    #[arg(long)]
    pub bits: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    ValidationFailed,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<afrelay::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let sink = Sink(cli.out);
    let result = match cli.command {
        Command::Coeffs(a) => commands::coeffs(&a, &sink),
        Command::Bessel(a) => commands::bessel(&a, &sink),
        Command::Dist(a) => commands::dist(&a, &sink),
        Command::Perf(a) => commands::perf(&a, &sink),
        Command::Validate(a) => commands::validate(&a, &sink),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
