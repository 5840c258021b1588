fn main() {
    std::process::exit(inkbridge::cli::run(std::env::args_os()));
}
