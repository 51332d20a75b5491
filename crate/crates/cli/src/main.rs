use std::process::ExitCode;

use clap::Parser;
use contact_bar_cli::{configure_threads, run, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = configure_threads(threads.as_deref()).and_then(|_| run(cli.command));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("contact-bar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
