use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hsforge::cli::run_from_args(std::env::args()) as u8)
}
