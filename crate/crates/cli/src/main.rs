use std::process::ExitCode;

use clap::Parser;

use sic_cli::{run, Args, EXIT_VALIDATION};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&args) {
        Ok((_, text)) => {
            if !args.quiet {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sicstats: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
