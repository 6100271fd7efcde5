fn main() {
    std::process::exit(prosk::cli::main_with_args(std::env::args_os()));
}
