use std::process::ExitCode;

fn main() -> ExitCode {
    actism::cli::main()
}
