fn main() {
    std::process::exit(kwlab::cli::run(std::env::args_os()));
}
