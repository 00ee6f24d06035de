//! Command-line front end: configuration, subcommands, output files and the
//! acceptance battery.

pub mod battery;
pub mod bessel;
pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::commands::RunError;
use crate::config::{Command, Params, RunConfig, UsageError};
use crate::output::Output;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "BBSPECTRA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bbspectra", version, about = "Principal eigenvalue experiments for bang-bang weights")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Radial limit profile: eigenvalue, profile CSV and summary JSON.
    Limit(Params),
    /// Harmonic mode table and coercivity constant.
    Modes(Params),
    /// Eigenvalue gap of perturbed disks against the ball.
    Asymmetry(Params),
    /// Optimal favorable set of one measure in a domain.
    Optimize(Params),
    /// Optimal favorable sets along a list of measures.
    Sweep(Params),
    /// Acceptance battery.
    Verify(Params),
}

impl Sub {
    fn split(self) -> (Command, Params) {
        match self {
            Sub::Limit(p) => (Command::Limit, p),
            Sub::Modes(p) => (Command::Modes, p),
            Sub::Asymmetry(p) => (Command::Asymmetry, p),
            Sub::Optimize(p) => (Command::Optimize, p),
            Sub::Sweep(p) => (Command::Sweep, p),
            Sub::Verify(p) => (Command::Verify, p),
        }
    }
}

fn thread_count(cfg: &RunConfig) -> Result<Option<usize>, UsageError> {
    if cfg.threads.is_some() {
        return Ok(cfg.threads);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(UsageError(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code:
/// 0 on success, 2 on usage or validation errors, 1 otherwise.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, params) = cli.command.split();
    let cfg = match params.merged().and_then(|p| RunConfig::resolve(command, &p)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match thread_count(&cfg) {
        Ok(Some(n)) => {
            // Fails only if a pool already exists in this process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    }
    let mut out = match Output::new(&cfg.out, cfg.hash()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = match command {
        Command::Limit => commands::limit(&cfg, &mut out),
        Command::Modes => commands::modes(&cfg, &mut out),
        Command::Asymmetry => commands::asymmetry(&cfg, &mut out),
        Command::Optimize => commands::optimize(&cfg, &mut out),
        Command::Sweep => commands::sweep(&cfg, &mut out),
        Command::Verify => commands::verify(&cfg, &mut out),
    };
    let (summary, code) = match result {
        Ok(s) => (s, 0),
        Err(RunError::Verify(s)) => (s, 1),
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match out.finish(&cfg, &summary) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
