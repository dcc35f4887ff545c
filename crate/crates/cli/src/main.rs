//! `qinterp`: desk-scale experiments on quantum polynomial interpolation.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qinterp::zmap::Scope;

#[derive(Parser, Debug)]
#[command(name = "qinterp", version, about = "Quantum polynomial interpolation over finite fields, at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact range sizes, fiber histograms and moments by enumeration
    Census(CensusArgs),
    /// Recover the canonical good preimage of a z vector
    Invert(InvertArgs),
    /// Simulate an interpolation algorithm as a dense statevector
    Simulate(SimulateArgs),
    /// Rank of the final states over all hidden polynomials
    Rank(RankArgs),
    /// Range of the multivariate map, exact or sampled (exploratory)
    Multivariate(MultivariateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Characteristic of the field
    #[arg(short = 'p', long, conflicts_with = "q")]
    pub p: Option<u64>,
    /// Extension degree
    #[arg(short = 'r', long, default_value_t = 1, requires = "p")]
    pub r: u32,
    /// Field order, or a sweep `lo..hi` over all prime powers in range
    #[arg(short = 'q', long)]
    pub q: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Degree bound of the hidden polynomial
    #[arg(short = 'd', long)]
    pub d: usize,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeArg {
    All,
    Good,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::All => Scope::All,
            ScopeArg::Good => Scope::Good,
        }
    }
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of queries
    #[arg(short = 'k', long)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of queries; defaults to (d+1)/2 for odd d and d/2+1 for even d
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    /// Comma-separated canonical indices z_0,...,z_d
    #[arg(long, value_delimiter = ',', required_unless_present = "verify_all")]
    pub z: Option<Vec<u64>>,
    /// Invert every good pair and check the round trip
    #[arg(long)]
    pub verify_all: bool,
    /// Draws of the extra entry for even d (default 40 k!)
    #[arg(long)]
    pub attempt_cap: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantArg {
    Optimal,
    Pgm,
    Superposed,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryArg {
    Phase,
    Standard,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub variant: VariantArg,
    #[command(flatten)]
    pub common: Common,
    #[arg(short = 'k', long)]
    pub k: usize,
    /// Hidden coefficients c_0,...,c_d as canonical indices (random if absent)
    #[arg(long, value_delimiter = ',', conflicts_with = "all_c")]
    pub c: Option<Vec<u64>>,
    /// Run every hidden polynomial and report the spread of success
    #[arg(long)]
    pub all_c: bool,
    #[arg(long, value_enum, default_value_t = QueryArg::Phase)]
    pub query: QueryArg,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(short = 'k', long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ScopeArg::All)]
    pub scope: ScopeArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvMode {
    Exact,
    Sample,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleArg {
    Auto,
    Membership,
    Distinct,
}

#[derive(Args, Debug)]
pub struct MultivariateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of variables
    #[arg(short = 'n', long, default_value_t = 2)]
    pub n: usize,
    #[arg(short = 'k', long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MvMode::Exact)]
    pub mode: MvMode,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = SampleArg::Auto)]
    pub sampler: SampleArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
