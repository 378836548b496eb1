fn main() {
    std::process::exit(causal_bandits::harness::cli::cli_main(std::env::args_os()));
}
