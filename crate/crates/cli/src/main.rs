mod args;
mod commands;
mod metadata;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "code": "usage", "message": msg.trim() }));
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "code": e.code(), "message": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
