mod cache;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{FlagValues, Settings};
use crate::error::CliError;

/// Spectra and spectral gaps of CSS gauge code Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "gaugegap", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Eigensolver residual tolerance, relative to max(1, |λ|).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed of the eigensolver start vectors.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Operator application budget per solve.
    #[arg(long, global = true)]
    pub max_matvecs: Option<usize>,
    /// TOML config file (default: ./gaugegap.toml when present).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Neither read nor write the result cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Emit CSV instead of JSON where supported.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write the result to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress messages on standard error.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

/// Where the code comes from: a built-in family or a code file.
#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    #[arg(long, value_parser = ["ising1d", "xy1d", "xy-plaquette", "compass2d", "compass3d", "gcc"])]
    pub model: Option<String>,
    /// Chain length or lattice side, depending on the model.
    #[arg(long)]
    pub size: Option<usize>,
    /// Code file in the `gaugecode v1` format.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Natural,
    MinWeight,
    Echelon,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in model families.
    Models,
    /// Print the (L,S,T,R) matrices and the dimension summary.
    Decompose {
        #[command(flatten)]
        code: CodeArgs,
        /// Print the matrices as `<NAME> <bits>` lines followed by a JSON summary line.
        #[arg(long)]
        text: bool,
    },
    /// Leading eigenvalues of one sector block.
    Spectrum {
        #[command(flatten)]
        code: CodeArgs,
        /// Sector as `<tx bits>,<tz bits>` (default: the ground sector).
        #[arg(long)]
        sector: Option<String>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Solve the full block instead of combining commuting ideals.
        #[arg(long)]
        no_ideals: bool,
    },
    /// Spectral gap from the sector search.
    Gap {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        gap: GapArgs,
        /// Also compare λ2 with the extreme frustrated-sector values.
        #[arg(long)]
        check_protofact: bool,
    },
    /// Gaps over a list of sizes, for plotting gap against n.
    Gapscan {
        #[arg(long, value_parser = ["ising1d", "xy1d", "xy-plaquette", "compass2d", "compass3d"])]
        model: String,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[command(flatten)]
        gap: GapArgs,
    },
    /// Commuting ideals of the gauge group and their dimensions.
    Ideals {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Check the decomposition, and optionally the dense oracle and Perron properties.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        /// Compare the dense full spectrum with the union of sector spectra.
        #[arg(long)]
        oracle: bool,
        /// Run the Perron-Frobenius diagnostics.
        #[arg(long)]
        perron: bool,
    },
    /// Cut bounds for a double well or a small sector block.
    Cheeger {
        /// Dimension of the double-well path graph.
        #[arg(long, conflicts_with_all = ["model", "file"])]
        double_well: Option<usize>,
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        sector: Option<String>,
        /// Also count sign changes along stabilizer paths in the Γ component.
        #[arg(long)]
        crossings: bool,
    },
    /// Time decomposition, block assembly, operator application and a top solve.
    Bench {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        sector: Option<String>,
        /// Operator applications to time.
        #[arg(long, default_value_t = 20)]
        applies: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    /// Enumerate every X (and Z) sector instead of single frustrations.
    #[arg(long)]
    pub full_sweep: bool,
    /// File of qubit permutations (one per line) used to merge equivalent sectors.
    #[arg(long)]
    pub sym: Option<PathBuf>,
    /// Permutation exchanging X and Z generators; overrides the builder's.
    #[arg(long)]
    pub duality: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BasisArg::Natural)]
    pub basis: BasisArg,
    #[arg(long)]
    pub no_ideals: bool,
}

fn emit(global: &GlobalArgs, out: commands::Output) -> Result<(), CliError> {
    let text = match out {
        commands::Output::Json(v) => serde_json::to_string_pretty(&v)? + "\n",
        commands::Output::Text(t) => t,
    };
    match &global.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let flags = FlagValues {
        threads: cli.global.threads,
        tol: cli.global.tol,
        seed: cli.global.seed,
        max_matvecs: cli.global.max_matvecs,
        config: cli.global.config.clone(),
        no_cache: cli.global.no_cache,
    };
    let settings = Settings::resolve(&flags)?;
    if let Some(t) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let ctx = commands::Context::new(settings, cli.global.csv, cli.global.quiet);
    let outcome = commands::dispatch(&ctx, &cli.command)?;
    emit(&cli.global, outcome.output)?;
    match outcome.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
