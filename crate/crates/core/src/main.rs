fn main() {
    std::process::exit(herzlab::cli::main_with_args(std::env::args_os()));
}
