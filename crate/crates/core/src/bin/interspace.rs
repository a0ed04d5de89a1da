fn main() {
    std::process::exit(interspace::cli::run(std::env::args_os()));
}
