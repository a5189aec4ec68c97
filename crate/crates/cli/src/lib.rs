//! `adiabat` command-line tool: spectra, Γ sweeps, propagation comparisons and self-tests.
//!
//! Exit codes: 0 success, 1 input, I/O or numeric failure, 2 degenerate spectrum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod selftest;

use config::{GridSpec, ModelSource, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_DEGENERATE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: adiabat_core::Error,
    },
    #[error(transparent)]
    Core(#[from] adiabat_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Stage { source: e, .. } | CliError::Core(e) if e.is_degeneracy() => {
                EXIT_DEGENERATE
            }
            _ => EXIT_FAILURE,
        }
    }
}

/// Attaches the failing stage to a core error.
pub(crate) fn stage<T>(what: &str, r: adiabat_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Stage {
        stage: what.to_string(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "adiabat",
    version,
    about = "Open-system adiabaticity diagnostics for Lindblad models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinName {
    Spin,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model description file (JSON).
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// Built-in model; the default when no file is given.
    #[arg(long, global = true, value_enum)]
    pub builtin: Option<BuiltinName>,
    /// Decay rate in units of the field strength.
    #[arg(long, global = true, default_value_t = config::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Azimuthal driving frequency.
    #[arg(long, global = true, default_value_t = config::DEFAULT_OMEGA)]
    pub omega: f64,
    /// Field polar angle in radians.
    #[arg(long, global = true, default_value_t = config::DEFAULT_THETA)]
    pub theta: f64,
    /// Start of the time domain; overrides the model's own.
    #[arg(long, global = true)]
    pub t0: Option<f64>,
    /// End of the time domain; overrides the model's own.
    #[arg(long, global = true)]
    pub t1: Option<f64>,
    /// γ grid as start:end:count.
    #[arg(long, global = true, default_value = "0.1:3:30")]
    pub grid_gamma: GridSpec,
    /// ω grid as start:end:count.
    #[arg(long, global = true, default_value = "0:1:30")]
    pub grid_omega: GridSpec,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-11)]
    pub abs_tol: f64,
    /// Smaller sample counts and grids.
    #[arg(long, global = true)]
    pub quick: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropagatorName {
    Master,
    Embedded,
    Adiabatic,
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialState {
    /// First basis state.
    Ground,
    /// Last basis state.
    Excited,
    Mixed,
    /// Reshaped λ = 0 eigenvector of the generator at the start time.
    Stationary,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigensystem of the effective Hamiltonian at the start time.
    Spectrum,
    /// Γ(γ, ω) surface of the spin model.
    Sweep,
    /// Runs several propagators from one initial state and compares them.
    Compare {
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "master,embedded"
        )]
        propagators: Vec<PropagatorName>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value = "excited")]
        initial: InitialState,
    },
    /// Eigenbasis frame diagnostics and the rotated-frame Γ.
    Rotated {
        #[arg(long, default_value_t = 801)]
        frame_nodes: usize,
    },
    /// Closed-form spin spectrum against the generic pipeline, plus the Γ surface.
    Spin,
    /// Randomized invariant suites.
    Selftest {
        /// Corrupts the jump coupling term; the oracle suite must then fail.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Compare { .. } => "compare",
            Command::Rotated { .. } => "rotated",
            Command::Spin => "spin",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn resolve(cli: &Cli) -> RunConfig {
    let c = &cli.common;
    let model = match &c.model {
        Some(path) => ModelSource::File { path: path.clone() },
        None => ModelSource::Spin {
            gamma: c.gamma,
            omega: c.omega,
            theta: c.theta,
        },
    };
    RunConfig {
        subcommand: cli.command.name().to_string(),
        model,
        out: c.out.clone(),
        t0: c.t0,
        t1: c.t1,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        grid_gamma: c.grid_gamma,
        grid_omega: c.grid_omega,
        seed: c.seed,
        quick: c.quick,
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli);
    cfg.validate()?;
    match &cli.command {
        Command::Selftest { inject_fault } => selftest::run(&cfg, *inject_fault),
        other => {
            cfg.prepare_out()?;
            match other {
                Command::Spectrum => commands::spectrum(&cfg),
                Command::Sweep => commands::sweep(&cfg),
                Command::Compare {
                    propagators,
                    samples,
                    initial,
                } => commands::compare(&cfg, propagators, *samples, *initial),
                Command::Rotated { frame_nodes } => commands::rotated(&cfg, *frame_nodes),
                Command::Spin => commands::spin(&cfg),
                Command::Selftest { .. } => unreachable!(),
            }
        }
    }
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn run<I, A>(args: I) -> u8
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own usage code would collide with the degeneracy code
            return if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
