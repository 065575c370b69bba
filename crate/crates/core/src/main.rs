fn main() {
    std::process::exit(subsums::cli::run(std::env::args_os()));
}
