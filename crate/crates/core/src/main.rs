fn main() {
    std::process::exit(wikicred::cli::run(std::env::args_os()));
}
