fn main() {
    std::process::exit(angleheads::cli::run(std::env::args_os()));
}
