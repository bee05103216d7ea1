fn main() {
    std::process::exit(chanest::cli::run(std::env::args_os()));
}
