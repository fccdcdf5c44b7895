fn main() {
    std::process::exit(igeo::cli::run_from_args(std::env::args_os()));
}
