use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rsrepair::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((pass, text)) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
