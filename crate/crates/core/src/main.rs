use std::process::ExitCode;

fn main() -> ExitCode {
    wassersolve::cli::run(std::env::args_os())
}
