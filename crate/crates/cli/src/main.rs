//! `gapfield`: closed-form predictions, reference solves and ε-sweeps for the
//! field between a conductor and the matrix boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gapfield::Error;
use serde::Serialize;

use commands::SweepFailure;
use config::RunConfig;
use output::{sha256_hex, unix_now, Manifest, RunDir};

#[derive(Debug, Parser)]
#[command(name = "gapfield", version, about = "Field concentration in narrow gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regime, leading coefficients and predicted field.
    Asym,
    /// Reference solve at the configured ε.
    Solve,
    /// Solve across `eps_list`, fit rates and run the requested checks.
    Sweep,
    /// Check the patch hypotheses of the configured geometry.
    CheckGeometry,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Asym => "asym",
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::CheckGeometry => "check-geometry",
        }
    }
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Mesh(_) | Error::Solver(_) | Error::Io(_) => EXIT_CHECK,
        _ => EXIT_CONFIG,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

/// Stdout may be a closed pipe; reports also land in the run directory.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_json<T: Serialize>(value: &T) {
    match serde_json::to_string_pretty(value) {
        Ok(s) => emit(&s),
        Err(e) => eprintln!("error: {e}"),
    }
}

struct Session {
    text: String,
    cfg: RunConfig,
    dir: Option<RunDir>,
    started: f64,
    threads: usize,
}

impl Session {
    fn finish<T: Serialize>(&self, command: &Command, artifact: &str, report: &T) -> Result<(), Error> {
        if let Some(dir) = &self.dir {
            dir.write_json(artifact, report)?;
            dir.write_json(
                "manifest.json",
                &Manifest {
                    tool: env!("CARGO_PKG_NAME"),
                    version: env!("CARGO_PKG_VERSION"),
                    command: command.name(),
                    config_sha256: sha256_hex(self.text.as_bytes()),
                    config: &self.cfg,
                    threads: self.threads,
                    started_unix: self.started,
                    finished_unix: unix_now(),
                },
            )?;
        }
        Ok(())
    }
}

fn open(cli: &Cli) -> Result<Session, Error> {
    let started = unix_now();
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(|e| match e {
        Error::Json(j) => Error::Config(format!("schema: {j}")),
        other => other,
    })?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let dir = cli.out.as_deref().map(RunDir::create).transpose()?;
    Ok(Session { text, cfg, dir, started, threads: rayon::current_num_threads() })
}

fn run(cli: Cli) -> ExitCode {
    let session = match open(&cli) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let cfg = &session.cfg;
    let outcome: Result<bool, Error> = match &cli.command {
        Command::Asym => commands::asym(cfg).and_then(|r| {
            print_json(&r);
            session.finish(&cli.command, "asym.json", &r).map(|_| true)
        }),
        Command::Solve => commands::solve(cfg, session.dir.as_ref()).and_then(|r| {
            print_json(&r);
            session.finish(&cli.command, "solve.json", &r).map(|_| r.passed())
        }),
        Command::Sweep => match commands::sweep(cfg, session.dir.as_ref()) {
            Ok(r) => {
                for row in r.table() {
                    emit(&row);
                }
                for note in &r.notes {
                    emit(&format!("note: {note}"));
                }
                session.finish(&cli.command, "fits.json", &r).map(|_| r.passed())
            }
            Err(SweepFailure::Partial(records, e)) => {
                eprintln!("error: {e}; {} sweep points completed", records.len());
                return ExitCode::from(EXIT_CHECK);
            }
            Err(SweepFailure::Other(e)) => Err(e),
        },
        Command::CheckGeometry => commands::check_geometry(cfg).and_then(|r| {
            print_json(&r);
            session.finish(&cli.command, "geometry.json", &r).map(|_| r.all_pass())
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
