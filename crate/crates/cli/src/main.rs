fn main() {
    std::process::exit(blersr_cli::run(std::env::args_os()));
}
