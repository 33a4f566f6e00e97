fn main() {
    std::process::exit(latwave_cli::run(std::env::args().collect()));
}
