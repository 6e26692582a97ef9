// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pttrap::io::Json;

use commands::Outcome;
use config::{CliError, CommonArgs, Extras, RunConfig};

/// Moving-wall trap modes with an imaginary coordinate shift.
///
/// Exit codes: 0 ok, 1 verification failure, 2 configuration error,
/// 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "pttrap", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantized energies of the trapped modes, optionally with the full-line ladder
    Spectrum(SpectrumArgs),
    /// Wall trajectory L(t), L'(t) and alpha(t) on [0, t]
    Scale(Plain),
    /// Normalized mode sampled on [0, L(t)]
    Mode(Plain),
    /// Density profile, with the radial part, including both wall values
    Density(Plain),
    /// Norm, <H> and <x> under the selected conjugation
    Observables(ObservablesArgs),
    /// Crank-Nicolson evolution compared against the closed form
    Evolve(EvolveArgs),
    /// Run the numbered acceptance checks
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Plain {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of trapped modes
    #[arg(long)]
    count: Option<usize>,
    /// Append the full-line ladder for both quasi-parities
    #[arg(long)]
    fullline: bool,
    /// Highest full-line index n
    #[arg(long)]
    nmax: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ObservablesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bra convention: shift, continued or both
    #[arg(long)]
    conj: Option<String>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct EvolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Time step (at most 1e-3)
    #[arg(long)]
    dt: Option<f64>,
    /// Write a snapshot every this many steps, beside --out
    #[arg(long)]
    snapshot_every: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Offset the claimed energy to exercise the detectors
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
}

fn resolve(command: &Command) -> Result<RunConfig, CliError> {
    let none = Extras::default();
    match command {
        Command::Spectrum(a) => RunConfig::resolve(
            "spectrum",
            &a.common,
            &Extras { count: a.count, fullline: a.fullline, nmax: a.nmax, ..none },
        ),
        Command::Scale(a) => RunConfig::resolve("scale", &a.common, &none),
        Command::Mode(a) => RunConfig::resolve("mode", &a.common, &none),
        Command::Density(a) => RunConfig::resolve("density", &a.common, &none),
        Command::Observables(a) => {
            RunConfig::resolve("observables", &a.common, &Extras { conj: a.conj.clone(), ..none })
        }
        Command::Evolve(a) => RunConfig::resolve(
            "evolve",
            &a.common,
            &Extras { dt: a.dt, snapshot_every: a.snapshot_every, ..none },
        ),
        Command::Verify(a) => RunConfig::resolve(
            "verify",
            &a.common,
            &Extras { report: a.report.clone(), inject_fault: a.inject_fault, ..none },
        ),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        "spectrum" => commands::spectrum(cfg),
        "scale" => commands::scale(cfg),
        "mode" => commands::wavefunction(cfg),
        "density" => commands::density(cfg),
        "observables" => commands::observables(cfg),
        "evolve" => commands::evolve(cfg),
        "verify" => commands::verify(cfg),
        other => unreachable!("unknown command {other}"),
    }
}

/// The manifest goes beside the primary output file, or to stderr.
fn emit_manifest(cfg: &RunConfig, results: Json) -> Result<(), CliError> {
    let manifest = Json::object()
        .with("tool", "pttrap")
        .with("version", env!("CARGO_PKG_VERSION"))
        .with("config", cfg.to_json())
        .with("results", results)
        .render();
    match cfg.out.as_ref().or(cfg.report.as_ref()) {
        Some(path) => {
            let path = PathBuf::from(format!("{}.manifest.json", path.display()));
            commands::write_file(&path, &manifest)
        }
        None => {
            eprint!("{manifest}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = resolve(&cli.command)?;
    let outcome = dispatch(&cfg)?;
    match &cfg.out {
        Some(path) => commands::write_file(path, &outcome.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(outcome.body.as_bytes());
        }
    }
    emit_manifest(&cfg, outcome.results)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pttrap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
