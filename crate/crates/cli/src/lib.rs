//! Command-line front-end: kernel tables, asymptotic sweeps, sandwich checks,
//! Green/resolvent and concentration tables, and randomized verification suites.

pub mod commands;
pub mod grid;
pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

/// Process exit codes, one per error path.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SUITE_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NON_CONVERGED: i32 = 3;
    pub const REGIME_UNREACHABLE: i32 = 4;
    pub const VIOLATED: i32 = 5;
    pub const UNSUPPORTED: i32 = 6;
    pub const MISSING_NU: i32 = 7;
    pub const NOT_TRANSIENT: i32 = 8;
    pub const P0_INFINITE: i32 = 9;
    pub const OUT_OF_REGIME: i32 = 10;
    pub const REGIME_MISMATCH: i32 = 11;
    pub const DIVERGENT_HEAD: i32 = 12;
    pub const IO: i32 = 13;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub msg: String,
}

impl CliError {
    pub fn new(code: i32, kind: &str, msg: impl Into<String>) -> Self {
        CliError { code, kind: kind.into(), msg: msg.into() }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::new(exit::CONFIG, "CONFIG", msg)
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self::new(exit::IO, "IO", msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg: String = self.msg.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();
        write!(f, "error[{}]: {}", self.kind, msg.trim())
    }
}

impl From<levy_core::Error> for CliError {
    fn from(e: levy_core::Error) -> Self {
        use levy_core::Error as E;
        let (code, msg) = match &e {
            E::Domain(m) | E::Parse(m) => (exit::CONFIG, m.clone()),
            E::NonConverged(m) => (exit::NON_CONVERGED, m.clone()),
            E::RegimeUnreachable(m) => (exit::REGIME_UNREACHABLE, m.clone()),
            E::Unsupported(m) => (exit::UNSUPPORTED, m.clone()),
            E::MissingNu(m) => (exit::MISSING_NU, m.clone()),
            E::NotTransient(m) => (exit::NOT_TRANSIENT, m.clone()),
            E::P0Infinite => (exit::P0_INFINITE, "density is infinite at the origin".into()),
            E::OutOfRegime(m) => (exit::OUT_OF_REGIME, m.clone()),
            E::RegimeMismatch(m) => (exit::REGIME_MISMATCH, m.clone()),
            E::DivergentHead(m) => (exit::DIVERGENT_HEAD, m.clone()),
        };
        CliError::new(code, e.kind(), msg)
    }
}

/// Parse `args` (including the program name), execute, and return the exit
/// code. Tables go to `out` unless redirected by `--out`; errors are written
/// to `err` as a single line.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { exit::CONFIG } else { exit::OK };
            }
            let text = e.render().to_string();
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let first = first.trim().trim_start_matches("error:").trim();
            let _ = writeln!(err, "{}", CliError::new(exit::CONFIG, "USAGE", first));
            return exit::CONFIG;
        }
    };
    match commands::execute(cli, out) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.code
        }
    }
}
