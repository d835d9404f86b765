fn main() {
    std::process::exit(qsl::cli::run(std::env::args_os()));
}
