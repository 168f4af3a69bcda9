fn main() {
    std::process::exit(polyconv::cli::main_with_args(std::env::args_os()));
}
