mod commands;
mod output;

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfp_core::rational::{self, Rational};

use crate::output::Format;

/// Generalized Fibonacci polynomials: exact terms, roots, orthogonality
/// weights and the birth-and-death chains induced by Lucas-type families.
#[derive(Debug, Parser)]
#[command(name = "gfp-lab", version)]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Registry name (case and punctuation insensitive) or an inline JSON
    /// family such as {"kind":"fibonacci","d":["0","1"],"g":["1"]}.
    #[arg(long, required_unless_present = "family_file", conflicts_with = "family_file")]
    pub family: Option<String>,

    /// File holding a JSON family.
    #[arg(long, value_name = "PATH")]
    pub family_file: Option<PathBuf>,
}

/// `d = cx + h` with `g = -(c - 1 + h)` (discrete walk) or
/// `d = cx + (k + 4)/4` with `g = -k/4` (continuous generator).
#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub c: Rational,

    /// Constant term of `d` for the discrete walk.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational, required_unless_present = "k", conflicts_with = "k")]
    pub h: Option<Rational>,

    /// Parameter of the continuous generator.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub k: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    /// Truncated matrix power (discrete).
    Power,
    /// Seeded Monte Carlo simulation (discrete).
    Mc,
    /// Truncated matrix exponential (continuous).
    Exp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact terms G_0..=G_n by the recurrence.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
    },
    /// Recurrence term against the closed binomial expansion.
    Expand {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
    },
    /// Closed-form evaluation at a complex point against the exact value.
    Binet {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        /// Real part of the evaluation point.
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Imaginary part of the evaluation point.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
    },
    /// Roots of G_n by lattice transfer, sorted by (re, im).
    Roots {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        /// Residual tolerance for accepted roots.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Orthogonality verdict with weight and evidence.
    Classify {
        #[command(flatten)]
        family: FamilyArgs,
        /// Largest index in the Gram check.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Gram matrix of G_0..=G_n under the constructed weight (CSV by default).
    Gram {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Discrete walk induced by d = cx + h: rows, potentials, ergodicity.
    Walk {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        h: Rational,
        /// Number of states listed.
        #[arg(long, default_value_t = 6)]
        rows: usize,
    },
    /// Continuous generator induced by d = cx + (k+4)/4: rows, potentials, ergodicity.
    Generator {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
        k: Rational,
        #[arg(long, default_value_t = 6)]
        rows: usize,
    },
    /// Karlin-McGregor transition probability with an optional oracle.
    Km {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        /// Number of steps (discrete walk).
        #[arg(long, required_unless_present = "t", conflicts_with = "t")]
        n: Option<usize>,
        /// Time (continuous generator).
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_enum)]
        oracle: Option<Oracle>,
        /// Monte Carlo trials.
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Monte Carlo seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Seeded Monte Carlo distribution after a number of steps (CSV by default).
    Simulate {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational, default_value = "16")]
        c: Rational,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rational, default_value = "-14")]
        h: Rational,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Ergodicity verdict from the potential series.
    Ergodicity {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Built-in families.
    Registry {
        /// Include the Jacobsthal pair.
        #[arg(long)]
        all: bool,
    },
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    rational::parse(text).map_err(|e| e.to_string())
}

/// Failure with its exit code: 2 for violated preconditions, 1 otherwise.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(gfp_core::Error),
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_precondition() => 2,
            Failure::Core(_) | Failure::Internal(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Internal(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<gfp_core::Error> for Failure {
    fn from(e: gfp_core::Error) -> Self {
        Failure::Core(e)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("GFP_LAB_THREADS") else {
        return Ok(());
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            gfp_core::par::init_thread_pool(n);
            Ok(())
        }
        _ => Err(Failure::Usage(format!(
            "GFP_LAB_THREADS must be a positive integer, got `{value}`"
        ))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| commands::run(cli.command))
        .and_then(|report| {
            let format = cli.format.unwrap_or(report.default_format);
            output::emit(&report, format, &mut io::stdout().lock()).map_err(|e| Failure::Internal(e.0))
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
