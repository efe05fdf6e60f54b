// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use mplex_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mplex: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
