fn main() {
    std::process::exit(smcensus::cli::run(std::env::args_os()));
}
