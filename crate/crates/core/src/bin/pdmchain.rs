fn main() {
    std::process::exit(pdmchain::cli::main_with_args(std::env::args_os().collect()));
}
