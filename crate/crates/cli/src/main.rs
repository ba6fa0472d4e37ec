fn main() {
    std::process::exit(relrate_cli::run(std::env::args_os()));
}
