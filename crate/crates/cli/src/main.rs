//! `nilprobe`: runs one experiment config and writes a JSON report.

mod config;
mod error;
mod ops;
mod report;
mod run;
mod validate;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{exit, CliError, CliResult};
use crate::run::{Format, Invocation};

#[derive(Debug, Parser)]
#[command(name = "nilprobe", version, about = "Finite-resolution experiments on torus and nilmanifold dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON); `-` reads standard input.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report path; artifacts are written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Exact minimality of a flow, a map or a time-t map.
    Minimal,
    /// Time-t minimality over a list of times.
    Exceptional,
    /// Search and verify a regional-proximality witness.
    RpCertify,
    /// Carry a witness from one action to a commuting one.
    RpTransfer,
    /// Sample the dynamical cube cloud.
    Cube,
    /// Hausdorff comparison of cube and N_d clouds of two actions.
    NdCompare,
    /// Cell coverage of a polynomial orbit.
    PolyDensity,
    /// Cell coverage of a fiber under a diagonal action.
    FiberCoverage,
    /// Canonical forms, orbits and distances in a suspension.
    Suspend,
    /// Regional proximality across a suspension and its base.
    SuspRp,
    /// Haar integral or multiple-correlation average.
    Average,
    /// Largest window average of a residual series.
    Ud,
    /// Banach density of return times.
    Density,
    /// Polynomial multiple average against the product of integrals.
    Potts,
    /// Residual of the multiple correlation against its closed form.
    Nilres,
    /// Embed a tuple of group elements through j*.
    Embed,
    /// Range membership and conjugation closure for j*.
    Membership,
    /// List config problems without running.
    Validate,
    /// Use the operation named in the config.
    Run,
}

impl Command {
    fn operation(self) -> Option<&'static str> {
        Some(match self {
            Command::Minimal => "minimal",
            Command::Exceptional => "exceptional",
            Command::RpCertify => "rp-certify",
            Command::RpTransfer => "rp-transfer",
            Command::Cube => "cube",
            Command::NdCompare => "nd-compare",
            Command::PolyDensity => "poly-density",
            Command::FiberCoverage => "fiber-coverage",
            Command::Suspend => "suspend",
            Command::SuspRp => "susp-rp",
            Command::Average => "average",
            Command::Ud => "ud",
            Command::Density => "density",
            Command::Potts => "potts",
            Command::Nilres => "nilres",
            Command::Embed => "embed",
            Command::Membership => "membership",
            Command::Validate => "validate",
            Command::Run => return None,
        })
    }
}

fn read_config(path: Option<&PathBuf>) -> CliResult<String> {
    let path = path.ok_or_else(|| CliError::Schema("--config is required".into()))?;
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn invoke(cli: &Cli) -> CliResult<i32> {
    let inv = Invocation {
        operation: cli.command.operation().map(str::to_string),
        config_text: read_config(cli.config.as_ref())?,
        seed: cli.seed,
        out: cli.out.clone(),
        format: cli.format,
    };
    run::run(&inv)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::SCHEMA } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    let code = match std::panic::catch_unwind(|| invoke(&cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("{}: {e}", e.kind());
            e.code()
        }
        Err(_) => {
            eprintln!("INTERNAL: the run panicked");
            exit::INTERNAL
        }
    };
    ExitCode::from(code as u8)
}
