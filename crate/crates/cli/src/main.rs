//! `polyconf`: reproducible runs of the confined-polygon computations.
//!
//! Exit codes: 0 success, 1 usage or regime error, 2 a verification or
//! monotonicity check failed, 3 the rejection sampler was exhausted.

mod commands;
mod config;

use std::fs::OpenOptions;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Command, RunConfig};

/// Why a run stopped early, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Exhausted(String),
}

impl From<polyconf::Error> for Failure {
    fn from(e: polyconf::Error) -> Self {
        if e.is_exhaustion() {
            Failure::Exhausted(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = RunConfig::resolve(cli.command, cli.opts)?;
    // Open the destination before computing so a bad path fails fast, but
    // leave existing contents alone until there is something to write.
    let file = match &cfg.out {
        Some(path) => {
            let existed = path.exists();
            let f = OpenOptions::new()
                .write(true)
                .create(true)
                .truncate(false)
                .open(path)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Some((f, path, existed))
        }
        None => None,
    };
    let result = match cfg.command {
        Command::Curve => commands::curve(&cfg),
        Command::Boundary => commands::boundary(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Sample => commands::sample(&cfg),
    };
    let out = match (result, &file) {
        (Ok(out), _) => out,
        (Err(e), Some((_, path, false))) => {
            let _ = std::fs::remove_file(path);
            return Err(e);
        }
        (Err(e), _) => return Err(e),
    };
    let written = match file {
        Some((mut f, _, _)) => f.set_len(0).and_then(|_| f.write_all(out.text.as_bytes())).and_then(|_| f.flush()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush())
        }
    };
    written.map_err(|e| Failure::Usage(format!("write failed: {e}")))?;
    Ok(out.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Exhausted(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_EXHAUSTED)
        }
    }
}
