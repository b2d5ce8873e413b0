fn main() {
    std::process::exit(texclass::cli::run(std::env::args_os()));
}
