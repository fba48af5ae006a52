fn main() {
    std::process::exit(bergman_core::cli::run(std::env::args_os()));
}
