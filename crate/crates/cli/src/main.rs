fn main() {
    std::process::exit(njc_cli::run(std::env::args_os()));
}
