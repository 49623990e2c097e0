use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use taxruin_cli::config::{parse_cli, resolve, CONFIG_ENV};
use taxruin_cli::run::{exit_code, run};

fn main() -> ExitCode {
    let cli = match parse_cli(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = resolve(cli, std::env::var_os(CONFIG_ENV).map(PathBuf::from)).and_then(|cfg| run(&cfg));
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result))
}
