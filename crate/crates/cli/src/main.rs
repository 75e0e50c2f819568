mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polariton_core::config::{Command, RunConfig};
use polariton_core::{Error, ErrorKind};

#[derive(Parser, Debug)]
#[command(name = "polariton", version, about = "Soft-mode damping of a cavity-coupled condensate")]
struct Cli {
    /// Configuration file with one `name = value` per line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set epsilon=0.003`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Steady-state amplitudes along the pump sweep.
    Meanfield,
    /// Phonon bands at `ratio`.
    Bands,
    /// Soft-mode frequency versus pump.
    Softmode,
    /// Born-Markov Beliaev rate for every epsilon.
    DampingSweep,
    /// Landau and Beliaev rates for every temperature.
    TemperatureSweep,
    /// Spectral function scan and its peak map.
    Spectral,
    /// Pole trajectories of the continued Green's function.
    Poles,
    /// Invariant suite with a pass/fail table.
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Meanfield => Command::Meanfield,
            Cmd::Bands => Command::Bands,
            Cmd::Softmode => Command::Softmode,
            Cmd::DampingSweep => Command::DampingSweep,
            Cmd::TemperatureSweep => Command::TemperatureSweep,
            Cmd::Spectral => Command::Spectral,
            Cmd::Poles => Command::Poles,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for pair in &cli.overrides {
        cfg.set_pair(pair)?;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(n) = cli.threads {
        cfg.threads = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(c) = cli.command {
        cfg.command = c.into();
    }
    Ok(cfg)
}

fn exit_code(kind: ErrorKind) -> ExitCode {
    ExitCode::from(match kind {
        ErrorKind::Config => 1,
        ErrorKind::Solver => 2,
        ErrorKind::Numerics => 3,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(e.kind());
        }
    };
    match commands::run(&cfg) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{c}");
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if outcome.checks.iter().any(|c| !c.passed) {
                return exit_code(ErrorKind::Numerics);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}
