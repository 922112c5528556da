//! Batch front-end for the Engel trace-map toolkit.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error,
//! 3 resource-cap refusal.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use args::{Cli, Command};
use commands::{Failure, Outcome, Report};
use config::{Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Runs one invocation. Data goes to `stdout` (or `--output`), diagnostics
/// to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut notices = Vec::new();
    let result = execute(cli.command, &mut notices, stdout);
    for n in &notices {
        let _ = writeln!(stderr, "note: {n}");
    }
    match result {
        Ok(code) => {
            if code == EXIT_MISMATCH {
                let _ = writeln!(stderr, "verification mismatch; see rows with agree=false");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, notices: &mut Vec<String>, stdout: &mut dyn Write) -> Outcome<i32> {
    let name = command.name();
    let cfg = RunConfig::build(name, command.into_flags(), notices)?;
    let report = match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cfg, notices))?
        }
        None => dispatch(&cfg, notices)?,
    };
    let bytes = match (cfg.format, &report.text) {
        (None, Some(text)) => text.clone().into_bytes(),
        (format, _) => output::render(&report.table, &cfg, format.unwrap_or(Format::Csv)),
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => stdout.write_all(&bytes).map_err(|e| Failure::Internal(format!("write failed: {e}")))?,
    }
    if report.mismatches.is_empty() {
        Ok(EXIT_OK)
    } else {
        for m in &report.mismatches {
            notices.push(format!("mismatch at {m}"));
        }
        Ok(EXIT_MISMATCH)
    }
}

fn dispatch(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    match cfg.command.as_str() {
        "survey" => commands::survey(cfg, notices),
        "image" => commands::image(cfg, notices),
        "orbits" => commands::orbits(cfg, notices),
        "minus-id" => commands::minus_id(cfg, notices),
        "oracle" => commands::oracle(cfg, notices),
        "equidist" => commands::equidist(cfg, notices),
        "trace-poly" => commands::trace_poly(cfg),
        "scan-conjecture" => commands::scan(cfg, notices),
        other => Err(Failure::Usage(format!("unknown command {other}"))),
    }
}
