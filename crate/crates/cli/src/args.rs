use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbit_design::KW_TOL;

/// D-optimal designs for two-level factorial models with all two-factor
/// interactions, when the number of active factors is bounded.
#[derive(Debug, Parser)]
#[command(name = "orbit-design", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct the optimal design for a region and certify it.
    Optimal(OptimalArgs),
    /// Check a design file with the equivalence theorem.
    Verify(VerifyArgs),
    /// Regenerate the wide- and narrow-bound design tables.
    Tables(TablesArgs),
    /// List every support point of a design with its weight.
    Expand(ExpandArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OptimalArgs {
    /// Number of factors K.
    #[arg(long = "k")]
    pub k: usize,
    /// Minimum number of active factors L.
    #[arg(long)]
    pub lower: usize,
    /// Maximum number of active factors U [default: K - L].
    #[arg(long)]
    pub upper: Option<usize>,
    /// Intermediate orbit for wide bounds.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Tolerance on max ψ - p.
    #[arg(long, default_value_t = KW_TOL)]
    pub tol: f64,
    /// Write the design file here.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Write the orbit summary as CSV here.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Allow K above 22.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Design file (JSON).
    pub file: PathBuf,
    /// Expected K; must match the file.
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Region lower bound [default: from the file].
    #[arg(long)]
    pub lower: Option<usize>,
    /// Region upper bound [default: from the file].
    #[arg(long)]
    pub upper: Option<usize>,
    #[arg(long, default_value_t = KW_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Wide,
    Narrow,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum, default_value_t = Which::Both)]
    pub which: Which,
    /// A single K or an inclusive range `A..B`, within 4..22.
    #[arg(long = "k", value_parser = parse_k_range, default_value = "4..22")]
    pub k: RangeInclusive<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ExpandArgs {
    #[arg(
        long = "k",
        required_unless_present = "design",
        conflicts_with = "design"
    )]
    pub k: Option<usize>,
    #[arg(long, required_unless_present = "design", conflicts_with = "design")]
    pub lower: Option<usize>,
    #[arg(long, conflicts_with = "design")]
    pub upper: Option<usize>,
    #[arg(long, conflicts_with = "design")]
    pub ell: Option<usize>,
    /// Expand a design file instead of constructing one.
    #[arg(long, value_name = "PATH")]
    pub design: Option<PathBuf>,
    /// Total number of runs; adds rounded replication counts.
    #[arg(long = "n")]
    pub n: Option<u64>,
    #[arg(long)]
    pub allow_large: bool,
}

pub const TABLE_K_MIN: usize = 4;
pub const TABLE_K_MAX: usize = 22;

pub fn parse_k_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("`{t}` is not a factor count: {e}"))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    if a < TABLE_K_MIN || b > TABLE_K_MAX {
        return Err(format!("K must lie within {TABLE_K_MIN}..{TABLE_K_MAX}"));
    }
    Ok(a..=b)
}
