fn main() {
    std::process::exit(gwilab::cli::run(std::env::args_os()));
}
