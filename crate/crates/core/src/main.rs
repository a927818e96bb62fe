fn main() -> std::process::ExitCode {
    cocasa::cli::main_with_args(std::env::args_os())
}
