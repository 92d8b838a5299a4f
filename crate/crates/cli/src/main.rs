fn main() {
    std::process::exit(xpoint_cli::main_with_args(std::env::args_os()));
}
