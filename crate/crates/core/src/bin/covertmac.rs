fn main() {
    std::process::exit(covertmac::cli::main_with_args(std::env::args_os()));
}
