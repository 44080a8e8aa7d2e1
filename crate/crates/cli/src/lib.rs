//! Front end for Galerkin sweeps, perturbation coefficients and fits.

pub mod commands;
pub mod config;
pub mod format;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_asympt, cmd_dump_matrix, cmd_fit, cmd_galerkin, AsymptReport, FitReport, GalerkinTable};
pub use config::{OutputFormat, RunConfig, EXAMPLES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical check failed: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<torus_dirac::Error> for CliError {
    fn from(e: torus_dirac::Error) -> Self {
        use torus_dirac::Error as E;
        match e {
            E::Parse(_)
            | E::NotReal { .. }
            | E::NotSymmetric { .. }
            | E::SingularCoframe { .. }
            | E::ModeOutOfRange { .. }
            | E::EpsOutOfRange(_)
            | E::TooFewSamples { .. }
            | E::FitOrder(_)
            | E::InvalidGrid(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "torus-dirac", version, about = "Spectrum of the axisymmetric Dirac operator on the 3-torus")]
pub struct Cli {
    /// List the bundled example configs and exit.
    #[arg(long)]
    pub list_examples: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tracked eigenvalue pairs for each eps and mode.
    Galerkin(RunArgs),
    /// First- and second-order coefficients by all three routes.
    Asympt(RunArgs),
    /// Polynomial fits of tracked eigenvalues in eps.
    Fit(RunArgs),
    /// Galerkin matrix entries for each eps.
    DumpMatrix(RunArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// Config file, or the name of a bundled example.
    #[arg(long, value_name = "PATH")]
    pub config: String,
    /// Galerkin truncation.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma separated eps values.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Comma separated modes or a range `a..b`.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub modes: Option<String>,
    #[arg(long, value_enum)]
    pub out: Option<OutputFormat>,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out_file: Option<PathBuf>,
}

impl RunArgs {
    /// The config with command-line overrides applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(eps) = &self.eps {
            cfg.eps = config::parse_reals(eps)?;
        }
        if let Some(modes) = &self.modes {
            cfg.modes = config::parse_modes(modes)?;
        }
        if let Some(out) = self.out {
            cfg.out = out;
        }
        if cfg.m == 0 {
            return Err(CliError::Config("m must be positive".into()));
        }
        Ok(cfg)
    }
}

/// Rendered command output; `violation` is set when a numerical check failed
/// but a report was still produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub violation: Option<String>,
}

pub fn list_examples() -> String {
    let mut s = String::new();
    for (name, text) in EXAMPLES {
        let summary = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
        s.push_str(&format!("{name:<20} {summary}\n"));
    }
    s
}

type Runner = fn(&RunConfig) -> Result<Output, CliError>;

pub fn run(command: &Command) -> Result<Output, CliError> {
    let (args, cmd): (&RunArgs, Runner) = match command {
        Command::Galerkin(a) => (a, |c| cmd_galerkin(c).map(|t| t.output(c.out))),
        Command::Asympt(a) => (a, |c| cmd_asympt(c).map(|r| r.output(c.out))),
        Command::Fit(a) => (a, |c| cmd_fit(c).map(|r| r.output(c.out))),
        Command::DumpMatrix(a) => (a, |c| cmd_dump_matrix(c).map(|text| Output { text, violation: None })),
    };
    let cfg = args.resolve()?;
    let out = cmd(&cfg)?;
    if let Some(path) = &args.out_file {
        std::fs::write(path, &out.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(Output { text: String::new(), violation: out.violation });
    }
    Ok(out)
}
