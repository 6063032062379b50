fn main() {
    std::process::exit(bdlm::cli::main_with_args(std::env::args_os()));
}
