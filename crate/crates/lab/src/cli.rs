//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::report::{explain, NO_SUITES_WARNING};
use crate::runner::{self, RunOptions, OUTPUT_DIR_ENV};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sfl-lab",
    version,
    about = "Verification suites for the spectral fractional Laplacian Pohozaev identity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the selected suites; exit 0 iff all pass.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
    /// Summarise an existing report.json.
    Explain { report: PathBuf },
    /// Write the Q1, P and Qs matrices as CSV without running suites.
    Matrices {
        config: PathBuf,
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output_dir: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and executes the command.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    dispatch(cli.command, out, err)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match command {
        Command::Run {
            config,
            seed,
            output_dir,
        } => match runner::run(&config, &RunOptions { seed, output_dir }) {
            Ok(outcome) => {
                if outcome.report.suites.is_empty() {
                    let _ = writeln!(err, "{NO_SUITES_WARNING}");
                }
                let _ = write!(out, "{}", explain(&outcome.report));
                let _ = writeln!(out, "report: {}", outcome.json_path.display());
                let _ = writeln!(out, "summary: {}", outcome.markdown_path.display());
                for f in &outcome.matrix_files {
                    let _ = writeln!(out, "matrix: {}", f.display());
                }
                if outcome.report.passed {
                    EXIT_PASS
                } else {
                    EXIT_FAIL
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        },
        Command::Explain { report } => match runner::read_report(&report) {
            Ok(report) => {
                let _ = write!(out, "{}", explain(&report));
                EXIT_PASS
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_ERROR
            }
        },
        Command::Matrices { config, output_dir } => {
            let options = RunOptions {
                seed: None,
                output_dir,
            };
            match runner::matrices(&config, &options) {
                Ok(files) => {
                    for f in files {
                        let _ = writeln!(out, "matrix: {}", f.display());
                    }
                    EXIT_PASS
                }
                Err(e @ runner::LabError::Construction(_)) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_FAIL
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
    }
}
