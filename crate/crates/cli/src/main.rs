use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(adiabat_cli::run(std::env::args_os()))
}
