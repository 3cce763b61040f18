use std::process::ExitCode;

fn main() -> ExitCode {
    gbfrs::cli::main_with_args(std::env::args_os().collect())
}
