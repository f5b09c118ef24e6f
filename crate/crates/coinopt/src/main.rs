fn main() {
    std::process::exit(coinopt::cli::main_with_args(std::env::args_os()));
}
