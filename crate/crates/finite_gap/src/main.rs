fn main() {
    std::process::exit(finite_gap::cli::run(std::env::args_os()));
}
