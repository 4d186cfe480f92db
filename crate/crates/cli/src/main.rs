fn main() {
    std::process::exit(etsmarket_cli::run(std::env::args_os()));
}
