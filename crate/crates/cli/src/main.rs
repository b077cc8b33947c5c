// Copyright 2026 The bellnl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! `bellnl`: JSON front end for the bellnl-core library.

mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => io::EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            if let Err(f) = io::emit(&outcome.output, cli.out.as_deref()) {
                return f.report();
            }
            if cli.verbose > 0 {
                eprintln!("{}", outcome.summary);
            }
            if outcome.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("warning: solver did not reach its gap tolerance; result is best so far");
                ExitCode::from(io::EXIT_NONCONVERGED)
            }
        }
        Err(f) => f.report(),
    }
}
