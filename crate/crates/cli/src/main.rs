//! `amplitude-lab`: command-line front end for amplitude-core.

mod commands;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use amplitude_core::{Error, Tolerances};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "amplitude-lab",
    version,
    about = "Transition amplitudes and geometric means on finite-dimensional algebras"
)]
struct Cli {
    /// Override the relative hermiticity, positivity and numeric tolerances.
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,
    /// Emit CSV instead of JSON for scalar reports.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transition amplitude (φ^{1/2}|ψ^{1/2}) of two functionals.
    Amp { phi: PathBuf, psi: PathBuf },
    /// Uhlmann transition probability of two functionals.
    Fidelity { phi: PathBuf, psi: PathBuf },
    /// Geometric mean of two positive forms.
    Gmean { alpha: PathBuf, beta: PathBuf },
    /// Purification of a state on a single matrix block.
    Purify {
        phi: PathBuf,
        /// Purify each block separately (multi-block algebras).
        #[arg(long)]
        blockwise: bool,
    },
    /// Square-root inequality report for two functionals.
    Ineq { phi: PathBuf, psi: PathBuf },
    /// Amplitudes along an increasing chain of subalgebras (CSV).
    Chain(ChainArgs),
    /// Central decomposition and the sum formula (CSV).
    Decompose {
        phi: PathBuf,
        psi: PathBuf,
        /// Comma-separated block weights; defaults to the central mass of (φ+ψ)/2.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        mu: Option<Vec<f64>>,
    },
    /// KMS boundary defects of the modular flow over a time grid (CSV).
    Kms {
        phi: PathBuf,
        /// Evaluate the boundary identity in this state instead of φ.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Comma-separated times.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_value = "-2,-1,0,1,2"
        )]
        t: Vec<f64>,
    },
    /// Quotient of a quasifree triple by the kernel of its majorizing product.
    QfReduce { triple: PathBuf },
    /// Deterministic randomized invariant suite.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest matrix block size drawn.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=8))]
        max_dim: u64,
        /// Random cases per check.
        #[arg(long, default_value_t = 24)]
        cases: usize,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "product_chain", "lumped"])))]
pub struct ChainArgs {
    /// Chain JSON file.
    spec: Option<PathBuf>,
    /// Product chain with this many sites.
    #[arg(long, value_name = "N", requires_all = ["site_a", "site_b"])]
    product_chain: Option<usize>,
    #[arg(long, value_enum)]
    site_a: Option<Site>,
    #[arg(long, value_enum)]
    site_b: Option<Site>,
    /// Lumped diagonal chain of length N with geometric weights.
    #[arg(long, value_name = "N", requires_all = ["lambda", "mu"])]
    lumped: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
}

/// Qubit site densities for product chains.
#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Site {
    Pure0,
    Pure1,
    Plus,
    Mixed,
}

/// Failures of a command, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Core(Error),
    SelftestFailed {
        report: String,
        failures: usize,
    },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                Error::Parse(_) => 4,
                Error::Shape(_) | Error::InvalidAlgebra(_) => 5,
                Error::NotPositive { .. }
                | Error::NotHermitian { .. }
                | Error::NotFaithful { .. } => 6,
                _ => 7,
            },
            CliError::SelftestFailed { .. } => 8,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => e.kind(),
            CliError::SelftestFailed { .. } => "SelftestFailed",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
            CliError::Core(e) => e.to_string(),
            CliError::SelftestFailed { failures, .. } => format!("{failures} check(s) failed"),
        }
    }
}

fn configure_threads() {
    let threads = std::env::var("AMPLITUDE_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let tol = cli.tol.map(Tolerances::with_uniform).unwrap_or_default();
    let csv = cli.csv;
    match cli.command {
        Command::Amp { phi, psi } => commands::amp(&phi, &psi, tol, csv),
        Command::Fidelity { phi, psi } => commands::fidelity(&phi, &psi, tol, csv),
        Command::Gmean { alpha, beta } => commands::gmean(&alpha, &beta, tol),
        Command::Purify { phi, blockwise } => commands::purify(&phi, blockwise, tol),
        Command::Ineq { phi, psi } => commands::ineq(&phi, &psi, tol, csv),
        Command::Chain(args) => commands::chain(&args, tol),
        Command::Decompose { phi, psi, mu } => commands::decompose(&phi, &psi, mu.as_deref(), tol),
        Command::Kms { phi, state, t } => commands::kms(&phi, state.as_deref(), &t, tol),
        Command::QfReduce { triple } => commands::qf_reduce(&triple, tol),
        Command::Selftest {
            seed,
            max_dim,
            cases,
        } => selftest::run(seed, max_dim as usize, cases),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e @ CliError::SelftestFailed { .. }) => {
            if let CliError::SelftestFailed { report, .. } = &e {
                print!("{report}");
            }
            eprintln!("{}", output::error_json(e.kind(), &e.message()));
            ExitCode::from(e.exit_code())
        }
        Err(e) => {
            eprintln!("{}", output::error_json(e.kind(), &e.message()));
            ExitCode::from(e.exit_code())
        }
    }
}
