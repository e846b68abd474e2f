fn main() {
    std::process::exit(tropmod::cli::main_with_args(std::env::args_os()));
}
