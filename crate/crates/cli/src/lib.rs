//! Command-line front end for fitting, evaluating and using RBF field
//! surrogates.

pub mod commands;
pub mod presets;

use std::io::Write;

use clap::{Parser, Subcommand};
use rbf_field::{Error, ErrorKind};

pub use commands::{DarcyArgs, EvalArgs, FitArgs, TheoryArgs};
pub use presets::{FieldSource, FitSettings, Layout, Preset};

#[derive(Debug, Parser)]
#[command(name = "rbf-field", version, about = "Fit, evaluate and use mesh-free RBF surrogates of cellwise fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a surrogate (optionally adaptive, optionally decomposed).
    Fit(FitArgs),
    /// Evaluate a surrogate file on a regular grid.
    Eval(EvalArgs),
    /// Solve the Darcy pressure problem with a field and/or a surrogate.
    Darcy(DarcyArgs),
    /// Compare the L1 step-approximation error with its closed form.
    VerifyTheory(TheoryArgs),
}

pub fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

pub fn run(cli: &Cli, stdout: &mut impl Write) -> rbf_field::Result<()> {
    match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a, stdout).map(|_| ()),
        Command::Eval(a) => commands::cmd_eval(a, stdout),
        Command::Darcy(a) => commands::cmd_darcy(a, stdout).map(|_| ()),
        Command::VerifyTheory(a) => commands::cmd_verify_theory(a, stdout).map(|_| ()),
    }
}
