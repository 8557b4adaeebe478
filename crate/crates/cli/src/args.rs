use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use srg_core::geometry::Side;
use srg_core::pairings::PairingSpec;
use srg_core::sampling::SamplerKind;

pub const SEED_ENV: &str = "SRG_SEED";

#[derive(Debug, Parser)]
#[command(name = "srg", version, about = "Directional scaled relative graphs on l1, l2 and l-infinity spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairings, norms, peak sets and directional cosines of two vectors.
    Pair(PairArgs),
    /// Sample the directional SRG of an operator and write CSV, SVG and a summary.
    Srg(SrgArgs),
    /// Check a stored cloud against a property region (exit 0 holds, 1 violated, 2 error).
    Certify(CertifyArgs),
    /// Exercise scaling, inversion, sums and compositions on matched samples.
    Calculus(CalculusArgs),
    /// Policy evaluation on a seeded random MDP, plain and regularised.
    Bellman(BellmanArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Comma-separated coordinates, e.g. `1,0.5`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// Restrict the report to one pairing.
    #[arg(long)]
    pub spec: Option<PairingSpec>,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Options shared by every sampling command. Unset flags fall back to
/// `--config`, then to built-in defaults; the resolved values are written
/// to `config.json`.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Seed; falls back to the SRG_SEED environment variable, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sampled increments.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub spec: Option<PairingSpec>,
    #[arg(long)]
    pub side: Option<Side>,
    #[arg(long)]
    pub sampler: Option<SamplerKind>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Previously written config.json to replay.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run sampling on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args, Clone, Default)]
pub struct OperatorArgs {
    /// Builtin operator: I, A1, Ainf, F1, Finf, bellman, bellman_reg.
    #[arg(long)]
    pub operator: Option<String>,
    /// JSON file with a square matrix as an array of rows.
    #[arg(long, conflicts_with = "operator")]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub actions: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SrgArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub op: OperatorArgs,
    /// Property checks to include in the summary, e.g. `lipschitz=1` or `strongly-monotone=0`.
    #[arg(long = "check", value_name = "PROPERTY=PARAM")]
    pub checks: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Cloud CSV written by `srg srg`.
    #[arg(long)]
    pub cloud: PathBuf,
    /// lipschitz, one-sided, strongly-monotone or cocoercive.
    #[arg(long)]
    pub property: String,
    #[arg(long, allow_hyphen_values = true)]
    pub parameter: f64,
    #[arg(long, default_value_t = srg_core::srg::DEFAULT_CERT_TOL)]
    pub tol: f64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Add,
    Compose,
    Scale,
    Invert,
}

#[derive(Debug, Args)]
pub struct CalculusArgs {
    #[arg(long, value_enum)]
    pub rule: Rule,
    #[command(flatten)]
    pub common: Common,
    /// First (outer) operator.
    #[arg(long)]
    pub a: String,
    /// Second (inner) operator, for `add` and `compose`.
    #[arg(long)]
    pub b: Option<String>,
    /// Scale factor for `scale`.
    #[arg(long, allow_hyphen_values = true)]
    pub factor: Option<f64>,
    #[arg(long, default_value_t = srg_core::srg::DEFAULT_CALCULUS_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct BellmanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub actions: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_fix: f64,
}
