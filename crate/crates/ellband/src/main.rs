fn main() {
    std::process::exit(ellband::cli::run(std::env::args_os()));
}
