fn main() {
    std::process::exit(quayside::cli::run(std::env::args_os()));
}
