use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sos", version, about = "SOS surface experiments: sampling, level lines, limit shapes")]
pub struct Cli {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory. Defaults to `$SOS_OUTPUT_ROOT/<command>`, then `sos-output/<command>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Check the spec and print violations without running.
    #[arg(long, global = true)]
    pub validate_only: bool,

    /// Skip SVG export.
    #[arg(long, global = true)]
    pub no_svg: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample height fields and extract their level lines.
    Sample(SampleArgs),
    /// Build reports from a finished `sample` run.
    Analyze(AnalyzeArgs),
    /// Wulff body and predicted limit curves for a surface tension.
    Wulff(WulffArgs),
    /// Sample and analyze a list of box sizes and seeds, then fit the fluctuation exponent.
    Sweep(SweepArgs),
    /// Exact distribution of a tiny box by enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Default, Args)]
pub struct SimArgs {
    /// Lattice sites per side.
    #[arg(long, short = 'L')]
    pub side: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Height cap; defaults to ceil(H) + 5.
    #[arg(long)]
    pub cap: Option<u32>,
    /// Sweeps between recorded samples.
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub e_h_threshold: Option<f64>,
    /// Warm-start level; defaults to floor(H).
    #[arg(long)]
    pub start_level: Option<u32>,
    /// Overrides ln(4 beta) / (4 beta).
    #[arg(long)]
    pub alpha_c: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct AnalysisArgs {
    /// Surface tension for limit shapes: constant, l1 or numeric-sos.
    #[arg(long)]
    pub tension: Option<String>,
    /// Directions used to build the Wulff body.
    #[arg(long)]
    pub directions: Option<usize>,
    /// Cascade depth in (0, 1).
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub critical_band: Option<f64>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Compute fluctuation statistics on view 1 when view 0 is predicted empty.
    #[arg(long)]
    pub allow_next_view: Option<bool>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Directory of a completed `sample` run.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct WulffArgs {
    #[arg(long)]
    pub tension: Option<String>,
    /// Inverse temperature for the numeric-sos tension.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub directions: Option<usize>,
    /// Dilation factors of the Wulff body, comma separated, each in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Box sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sides: Vec<usize>,
    /// Pick box sizes sharing this fractional height instead of `--sides`.
    #[arg(long)]
    pub target_alpha: Option<f64>,
    #[arg(long)]
    pub min_side: Option<usize>,
    #[arg(long)]
    pub max_side: Option<usize>,
    /// Chain seeds, comma separated; one chain per (side, seed) cell.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also write every sampled field.
    #[arg(long)]
    pub save_fields: Option<bool>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, short = 'L')]
    pub side: Option<usize>,
    #[arg(long)]
    pub cap: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
}
