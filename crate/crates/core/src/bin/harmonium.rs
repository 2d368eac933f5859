fn main() -> std::process::ExitCode {
    harmonium::cli::main_with_args(std::env::args_os())
}
