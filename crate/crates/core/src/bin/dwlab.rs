fn main() {
    std::process::exit(dwlab::cli::run(std::env::args_os()));
}
