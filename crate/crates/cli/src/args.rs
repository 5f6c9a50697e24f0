use std::path::PathBuf;

use chh_core::Fraction;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chh", version, about = "Correlated heavy-hitters in two-dimensional streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute space-minimal table sizes for the given thresholds.
    SolveParams {
        #[arg(long)]
        phi1: Fraction,
        #[arg(long)]
        phi2: Fraction,
        #[arg(long)]
        eps1: Fraction,
        #[arg(long)]
        eps2: Fraction,
    },

    /// Write a seeded Zipf workload as tab-separated tuples.
    Generate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        primary_domain: u64,
        #[arg(long)]
        secondary_domain: u64,
        #[arg(long, default_value_t = 1.1)]
        skew1: f64,
        #[arg(long, default_value_t = 1.0)]
        skew2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Stream tuples into a sketch and save a snapshot.
    Build {
        /// Input file; standard input when omitted.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        phi1: Fraction,
        #[arg(long)]
        phi2: Fraction,
        /// Defaults to phi1/10 when sizes are solved.
        #[arg(long)]
        eps1: Option<Fraction>,
        /// Defaults to phi2/10 when sizes are solved.
        #[arg(long)]
        eps2: Option<Fraction>,
        /// Outer table size; bypasses the solver together with --s2.
        #[arg(long, requires = "s2")]
        s1: Option<u64>,
        #[arg(long, requires = "s1")]
        s2: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Fail on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
    },

    /// Print the correlated heavy-hitters held in a snapshot.
    Report {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },

    /// Exact correlated heavy-hitters of a file.
    Exact {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        phi1: Fraction,
        #[arg(long)]
        phi2: Fraction,
        #[arg(long, value_enum, default_value_t = ExactMethod::Multipass)]
        method: ExactMethod,
        /// Tuple cap for the naive method.
        #[arg(long, default_value_t = chh_core::oracle::DEFAULT_TUPLE_CAP)]
        max_tuples: u64,
        #[arg(long)]
        strict: bool,
    },

    /// Sweep table sizes and write error statistics as CSV.
    Evaluate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        phi1: Fraction,
        #[arg(long)]
        phi2: Fraction,
        /// Tolerances to judge each row against; implied by the sizes when
        /// omitted.
        #[arg(long, requires = "eps2")]
        eps1: Option<Fraction>,
        #[arg(long, requires = "eps1")]
        eps2: Option<Fraction>,
        #[arg(long, value_delimiter = ',', required = true)]
        s1_list: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        s2_list: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Denominator::Phi1MinusEps1)]
        theory_denominator: Denominator,
        /// Also time a full-count run against one sketch pass (stderr only).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExactMethod {
    Multipass,
    Naive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Denominator {
    #[value(name = "phi1")]
    Phi1,
    #[value(name = "phi1-eps1")]
    Phi1MinusEps1,
}
