use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mdir",
    version,
    about = "Multiple-direction weighted logrank tests for two-sample censored data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test equality of two survival distributions.
    Test(TestArgs),
    /// Run a simulation study from a TOML configuration.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Parses `r,g`.
pub fn parse_rg(s: &str) -> Result<(u32, u32), String> {
    let (r, g) = s.split_once(',').ok_or_else(|| format!("expected r,g, got '{s}'"))?;
    let p = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|_| format!("'{x}' is not a nonnegative integer"))
    };
    Ok((p(r)?, p(g)?))
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// CSV file with header time,status,group.
    #[arg(long)]
    pub input: PathBuf,
    /// Include the crossing-hazards weight 1 − 2u (default).
    #[arg(long, overrides_with = "no_cross")]
    pub cross: bool,
    /// Leave out the crossing-hazards weight.
    #[arg(long, overrides_with = "cross")]
    pub no_cross: bool,
    /// Add the weight u^r (1 − u)^g; repeatable. Defaults to 0,0.
    #[arg(long = "rg", value_name = "R,G", value_parser = parse_rg)]
    pub rg: Vec<(u32, u32)>,
    /// Use no u^r (1 − u)^g weights at all (e.g. a crossing-only test).
    #[arg(long, conflicts_with = "rg")]
    pub no_rg: bool,
    /// Number of random permutations.
    #[arg(long, default_value_t = 10_000)]
    pub nperm: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report the boundary weight of the randomized permutation test.
    #[arg(long)]
    pub randomized: bool,
    /// Write Kaplan–Meier curves of both groups as SVG.
    #[arg(long, value_name = "PATH")]
    pub km_svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Type1,
    Power,
    Asympt,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub study: Study,
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the published replication counts instead of the desk-scale ones.
    #[arg(long)]
    pub paper_scale: bool,
    /// Directory for SVG power plots (power study only).
    #[arg(long, value_name = "DIR")]
    pub svg: Option<PathBuf>,
}
