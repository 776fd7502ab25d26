fn main() {
    std::process::exit(vitalcast::cli::run_from(std::env::args_os()));
}
