fn main() {
    std::process::exit(rankset_cli::run_cli(std::env::args_os()));
}
