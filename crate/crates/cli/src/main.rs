use std::process::ExitCode;

fn main() -> ExitCode {
    branchlearn::cli::run(std::env::args_os())
}
