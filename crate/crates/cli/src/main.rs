fn main() {
    std::process::exit(avtext_cli::run(std::env::args_os()));
}
