fn main() {
    std::process::exit(wavetrace_cli::main_with_args(std::env::args_os()));
}
