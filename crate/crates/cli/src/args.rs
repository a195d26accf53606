use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Cybersecurity capability maturity assessments: catalogs, scoring, reports.
#[derive(Debug, Parser)]
#[command(name = "ccmf", version)]
pub struct Cli {
    /// Store directory (defaults to $CCMF_HOME, then ./.ccmf)
    #[arg(long, global = true, value_name = "DIR")]
    pub store: Option<PathBuf>,

    /// Catalog as `id` or `id@version` (defaults to the built-in catalog)
    #[arg(long, global = true, value_name = "ID[@VERSION]")]
    pub catalog: Option<String>,

    /// Output format; tables unless set
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Print only identifiers and essential values
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect, validate and import catalogs
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Create and edit assessments
    #[command(subcommand)]
    Assess(AssessCommand),
    /// Score an assessment
    Score {
        assessment: String,
        #[command(flatten)]
        scoring: ScoringFlags,
        /// Print every calculation step
        #[arg(long)]
        trace: bool,
    },
    /// Export a scored report as JSON or CSV
    Report {
        assessment: String,
        #[command(flatten)]
        scoring: ScoringFlags,
        /// Write to this file instead of standard output
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// List practices and metrics below their maximum
    Gaps {
        assessment: String,
        #[command(flatten)]
        scoring: ScoringFlags,
    },
    /// Run the HTTP API
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = ccmf_service::DEFAULT_PORT, value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        /// Directory of UI assets to serve at /
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ScoringFlags {
    /// Count unrated practices and unevaluated metrics as 0
    #[arg(long)]
    pub missing_as_zero: bool,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Check a catalog file and print findings
    Validate { file: PathBuf },
    /// Show a catalog (see --catalog)
    Show,
    /// Validate a catalog file and add it to the store
    Import { file: PathBuf },
    /// List known catalogs
    List,
}

#[derive(Debug, Subcommand)]
pub enum AssessCommand {
    /// Start an assessment: all core domains plus chosen electives
    New {
        #[arg(long)]
        org: String,
        /// Elective domain id; repeatable
        #[arg(long = "elect", value_name = "DOMAIN")]
        electives: Vec<String>,
    },
    /// Set a domain's target tier (basic, intermediate, advanced or 1-3)
    Tier {
        assessment: String,
        domain: String,
        tier: ccmf_core::TierLevel,
    },
    /// Rate a practice: 0 not, 1 partially, 2 fully implemented
    Rate {
        assessment: String,
        domain: String,
        practice: String,
        #[arg(value_parser = clap::value_parser!(u8).range(0..=2))]
        value: u8,
        #[arg(long)]
        note: Option<String>,
    },
    /// Evaluate a metric from a measurement or rubric points
    Eval {
        assessment: String,
        domain: String,
        metric: String,
        /// Raw measurement for a quantitative metric
        #[arg(
            long,
            conflicts_with = "points",
            required_unless_present = "points",
            allow_negative_numbers = true
        )]
        value: Option<f64>,
        /// Rubric points for a qualitative metric
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
        points: Option<u8>,
        #[arg(long)]
        note: Option<String>,
    },
    /// Set weight factors: repeated `<domain> <risk> <compliance> <business> <interdependency>`
    Weights {
        assessment: String,
        #[arg(value_name = "DOMAIN R C B I", num_args = 0..)]
        entries: Vec<String>,
        /// Remove the weight profile
        #[arg(long, conflicts_with = "entries")]
        clear: bool,
    },
    /// Show completeness per domain
    Show { assessment: String },
    /// List stored assessments
    List,
    /// Delete an assessment
    Delete { assessment: String },
}
