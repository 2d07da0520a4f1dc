fn main() {
    std::process::exit(dyncomplete::cli::run(std::env::args_os()));
}
