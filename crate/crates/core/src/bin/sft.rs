use std::process::ExitCode;

use spiking_ft::cli::run_cli;
use spiking_ft::Error;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match run_cli(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
