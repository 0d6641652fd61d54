fn main() {
    std::process::exit(qhe_core::cli::run(std::env::args_os()));
}
