//! Command-line front end: every computation as a reproducible run.
//!
//! Exit codes: 0 success, 2 input/usage error, 3 resource limit,
//! 4 non-convergence, 1 anything else (I/O).

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Resource(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<lll::basis::BasisError> for CliError {
    fn from(e: lll::basis::BasisError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<lll::operators::OperatorError> for CliError {
    fn from(e: lll::operators::OperatorError) -> Self {
        use lll::operators::OperatorError::*;
        match e {
            ResourceLimit { .. } => CliError::Resource(e.to_string()),
            InvalidParams(_) => CliError::Input(e.to_string()),
            Io(_) | MalformedCache(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<lll::spectra::SpectraError> for CliError {
    fn from(e: lll::spectra::SpectraError) -> Self {
        use lll::spectra::SpectraError::*;
        match e {
            NonConvergence { .. } | LMaxInsufficient { .. } => {
                CliError::NonConvergence(e.to_string())
            }
            Operator(inner) => inner.into(),
            Basis(_) | TooManyEigenpairs { .. } | SectorMismatch { .. } => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<lll::trial::TrialError> for CliError {
    fn from(e: lll::trial::TrialError) -> Self {
        use lll::trial::TrialError::*;
        match e {
            ResourceLimit { .. } => CliError::Resource(e.to_string()),
            TooFewParticles(_) | UnstableParams { .. } => CliError::Input(e.to_string()),
        }
    }
}

impl From<lll::plasma::PlasmaError> for CliError {
    fn from(e: lll::plasma::PlasmaError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<lll::meanfield::MeanFieldError> for CliError {
    fn from(e: lll::meanfield::MeanFieldError) -> Self {
        use lll::meanfield::MeanFieldError::*;
        match e {
            NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            ThermalNeedsCharge => CliError::Input(e.to_string()),
        }
    }
}

impl From<lll::gp::GpError> for CliError {
    fn from(e: lll::gp::GpError) -> Self {
        use lll::gp::GpError::*;
        match e {
            NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            Spectra(inner) => inner.into(),
            NormViolation(_) | ZeroPolynomial => CliError::Input(e.to_string()),
        }
    }
}

/// Numerical runs for rapidly rotating bosons in the lowest Landau level.
#[derive(Parser)]
#[command(name = "lll", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for sector scans, MC chains and GP restarts
    /// (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Yrast table: lowest interaction eigenvalue, gap and kernel
    /// dimension per angular-momentum sector.
    #[command(allow_negative_numbers = true)]
    Yrast {
        #[command(flatten)]
        common: Common,
        /// Particle number.
        #[arg(long)]
        n: Option<u32>,
        /// Largest angular momentum sector.
        #[arg(long)]
        lmax: Option<u32>,
    },
    /// Spectral gaps and the gap-conjecture bookkeeping.
    #[command(allow_negative_numbers = true)]
    Gaps {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        lmax: Option<u32>,
    },
    /// Ground state of the full Hamiltonian over sectors.
    #[command(allow_negative_numbers = true)]
    Ground {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        lmax: Option<u32>,
    },
    /// Sweep (omega, k): optimal vortex charge, trial momentum and phase
    /// tag per grid point, with exact sector scans where affordable.
    #[command(allow_negative_numbers = true)]
    Phases {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        g: Option<f64>,
        /// omega grid as lo:hi:count.
        #[arg(long, value_name = "LO:HI:COUNT")]
        omega_grid: Option<String>,
        /// k grid as lo:hi:count.
        #[arg(long, value_name = "LO:HI:COUNT")]
        k_grid: Option<String>,
        /// Skip the exact scan when the trial sector dimension exceeds this.
        #[arg(long)]
        exact_dim_cap: Option<usize>,
    },
    /// Giant-vortex trial states: exact energies over a vortex-charge range.
    #[command(allow_negative_numbers = true)]
    Trial {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        /// Scan m = 0..=mmax.
        #[arg(long)]
        mmax: Option<u32>,
        /// Also write the Fock expansions as JSON.
        #[arg(long)]
        emit_fock: bool,
    },
    /// Metropolis Monte Carlo of the plasma analogy.
    #[command(allow_negative_numbers = true)]
    Plasma {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        sweeps: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        thin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        chains: Option<usize>,
        /// Histogram extent (default: auto from the annulus radius).
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Mean-field density profiles: numeric minimizer or closed forms.
    #[command(allow_negative_numbers = true)]
    Meanfield {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<u32>,
        /// Profile kind: numeric, annulus or thermal.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        damping: Option<f64>,
    },
    /// Gross-Pitaevskii minimization, Thomas-Fermi comparison and vortex
    /// zeros.
    #[command(allow_negative_numbers = true)]
    Gp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: Option<f64>,
        /// Coupling Ng of the per-particle functional.
        #[arg(long)]
        ng: Option<f64>,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// GP upper bound against exact diagonalization over an omega grid.
    #[command(allow_negative_numbers = true)]
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        g: Option<f64>,
        /// omega grid as lo:hi:count.
        #[arg(long, value_name = "LO:HI:COUNT")]
        omega_grid: Option<String>,
        #[arg(long)]
        lmax: Option<u32>,
        #[arg(long)]
        gp_lmax: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
