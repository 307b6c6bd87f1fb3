fn main() {
    std::process::exit(symring::cli::run(std::env::args_os()));
}
