fn main() {
    std::process::exit(maiclass::cli::run_cli(std::env::args_os()));
}
