//! `lenscoupled` command-line pipelines. Exit status: 0 on success, 1 on
//! runtime or I/O failure, 2 on usage errors.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::{ConfigFile, SCHEMA_VERSION};
use crate::error::CliError;
use crate::output::Sink;

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile {
            schema: SCHEMA_VERSION,
            ..Default::default()
        },
    };
    let spec = cfg.quadrature()?;
    let out = cli.out.as_deref();
    let sink = Sink::from_option(out);
    let (rendered, summary_sink) = match &cli.command {
        Command::Psf(a) => (commands::psf(a, &cfg, &spec)?, None),
        Command::GammaSweep(a) => (commands::gamma_sweep(a, &cfg, &spec)?, None),
        Command::CouplingMap(a) => (commands::coupling_map_cmd(a, &cfg, &spec)?, None),
        Command::Spectrum(a) => (commands::spectrum(a, &cfg, &spec)?, None),
        Command::Trap(a) => {
            let (r, s) = commands::trap(a, &cfg, &spec, out)?;
            (r, Some(s))
        }
    };
    sink.write(&rendered.primary)?;
    if let (Some(bytes), Some(s)) = (rendered.summary, summary_sink) {
        s.write(&bytes)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lenscoupled: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
