//! `docrec` command-line tool.
//!
//! Exit status: 0 on success, 1 when input cannot be read, parsed or
//! validated (diagnostics as JSON lines on stderr), 2 on usage errors.

mod args;
mod commands;
mod diag;
mod io;
mod json;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            failure.report();
            ExitCode::from(failure.status())
        }
    }
}
