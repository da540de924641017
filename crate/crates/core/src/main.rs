fn main() {
    std::process::exit(privtrade::cli::run(std::env::args_os()));
}
