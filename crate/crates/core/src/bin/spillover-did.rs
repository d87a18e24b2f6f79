fn main() {
    std::process::exit(spillover_did::cli::run(std::env::args_os()));
}
