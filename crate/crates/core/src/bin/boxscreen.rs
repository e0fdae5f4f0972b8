fn main() {
    std::process::exit(boxscreen::harness::cli::run(std::env::args_os()));
}
