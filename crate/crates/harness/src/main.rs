fn main() {
    std::process::exit(advamp_harness::cli::run(std::env::args_os()));
}
