fn main() {
    std::process::exit(trackaudit_cli::run(std::env::args_os()));
}
