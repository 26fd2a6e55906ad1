//! Output plumbing shared by the subcommands: comment-headed CSV with a
//! fixed float format, JSON summaries, and the exit-code contract.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Ways a command can end. `Ok(true)` is success (exit 0), `Ok(false)` a
/// failed `--check` (exit 1); the error cases split configuration
/// problems (exit 2) from numerical ones (exit 3).
pub enum Failure {
    Config(String),
    Numerical(String),
}

pub type CmdResult = Result<bool, Failure>;

impl From<treeharm::Error> for Failure {
    fn from(err: treeharm::Error) -> Self {
        Failure::Numerical(err.to_string())
    }
}

pub fn config_error<T>(message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(message.into()))
}

pub fn exit_code(result: CmdResult) -> ExitCode {
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("treeharm: checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(message)) => {
            eprintln!("treeharm: configuration error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(message)) => {
            eprintln!("treeharm: numerical failure: {message}");
            ExitCode::from(3)
        }
    }
}

/// One float, 17 significant digits, '.' decimal separator.
pub fn fmt_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// CSV assembled in memory so a run writes its bytes in one piece: a
/// '#'-comment header (tool version, full configuration echo, seed, q,
/// tau), one column-name line, then data rows. RFC 4180 line endings.
pub struct Csv {
    buffer: String,
}

impl Csv {
    /// `config` is the already-formatted `key=value` echo of the full
    /// command configuration.
    pub fn new(command: &str, config: &str, seed: Option<u64>, q: u32, tau: f64) -> Csv {
        let mut buffer = String::new();
        let _ = writeln!(buffer, "# treeharm {}\r", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(buffer, "# command: {command}\r");
        let _ = writeln!(buffer, "# config: {config}\r");
        if let Some(seed) = seed {
            let _ = writeln!(buffer, "# seed: {seed}\r");
        }
        let _ = writeln!(buffer, "# q: {q}\r");
        let _ = writeln!(buffer, "# tau: {}\r", fmt_float(tau));
        Csv { buffer }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buffer, "{}\r", fields.join(","));
    }

    pub fn columns(&mut self, names: &[&str]) {
        let _ = writeln!(self.buffer, "{}\r", names.join(","));
    }

    /// Write to `path`, or to stdout when no path is given. Returns
    /// whether stdout is still free for the JSON summary.
    pub fn finish(self, path: Option<&Path>) -> Result<SummarySink, Failure> {
        match path {
            Some(path) => {
                fs::write(path, self.buffer).map_err(|err| {
                    Failure::Config(format!("cannot write {}: {err}", path.display()))
                })?;
                Ok(SummarySink::Stdout)
            }
            None => {
                print!("{}", self.buffer);
                Ok(SummarySink::Stderr)
            }
        }
    }
}

/// Where a JSON summary should go: stdout normally, stderr when the CSV
/// already occupies stdout.
pub enum SummarySink {
    Stdout,
    Stderr,
}

pub fn emit_summary<T: serde::Serialize>(sink: &SummarySink, summary: &T) {
    let text = serde_json::to_string_pretty(summary).expect("summaries are plain data");
    match sink {
        SummarySink::Stdout => println!("{text}"),
        SummarySink::Stderr => eprintln!("{text}"),
    }
}

/// JSON report: to `path` when given, stdout otherwise.
pub fn write_report<T: serde::Serialize>(
    path: Option<&PathBuf>,
    report: &T,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("reports are plain data");
    match path {
        Some(path) => fs::write(path, text)
            .map_err(|err| Failure::Config(format!("cannot write {}: {err}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
