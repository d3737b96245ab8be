//! Batch front end: one JSON config in, JSON/CSV/QCGRID artifacts out.
//!
//! Exit status: 0 when every check passed, 1 when the run was inconclusive,
//! 2 for configuration or precondition errors, 3 for numerical failures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "teichlab", version, about = "Quasiconformal deformation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the main tolerance of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Where `solve` writes its grid (default `<out>/grid.qcgrid`).
    #[arg(long, global = true)]
    grid_out: Option<PathBuf>,

    /// Re-check an existing grid instead of solving.
    #[arg(long, global = true)]
    grid_in: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Hamilton-sequence extremality certificate.
    Certify,
    /// Fit the prefactors of the closed-form pairings.
    AuditConstants,
    /// Grid solution of the Beltrami equation.
    Solve,
    /// Members of a geodesic family and the constant-modulus check.
    Family,
    /// Pairing certificate separating two family members.
    Separate,
    /// Parameters of a string family from its dictionary pairings.
    Recover,
    /// Slit-disk modulus round trips and period integrals.
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Inconclusive = 1,
    Config = 2,
    Numerical = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Lib(#[from] teichlab::Error),
}

impl RunError {
    fn exit(&self) -> Exit {
        match self {
            RunError::Config(_) => Exit::Config,
            RunError::Io(_) => Exit::Numerical,
            RunError::Lib(e) if e.is_input_error() => Exit::Config,
            RunError::Lib(_) => Exit::Numerical,
        }
    }
}

fn run(cli: &Cli) -> Result<Exit, RunError> {
    let path = cli.config.as_ref().ok_or_else(|| RunError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(RunError::Config(format!("--tol must be positive, got {t}")));
        }
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(format!("--threads: {e}")))?;
    }
    let cx = commands::Context {
        out: output::Output::new(&cli.out)?,
        seed: cli.seed,
        tol: cli.tol,
        grid_out: cli.grid_out.clone(),
        grid_in: cli.grid_in.clone(),
    };
    match cli.command {
        Command::Certify => commands::certify(&text, &cx),
        Command::AuditConstants => commands::audit_constants(&text, &cx),
        Command::Solve => commands::solve(&text, &cx),
        Command::Family => commands::family(&text, &cx),
        Command::Separate => commands::separate(&text, &cx),
        Command::Recover => commands::recover(&text, &cx),
        Command::Rho => commands::rho(&text, &cx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("teichlab: {e}");
            e.exit()
        }
    };
    ExitCode::from(code as u8)
}
