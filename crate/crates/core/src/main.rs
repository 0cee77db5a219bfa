fn main() {
    std::process::exit(twqkd::cli::run(std::env::args_os()));
}
