fn main() {
    std::process::exit(predint::cli::main_with_args(std::env::args_os()));
}
