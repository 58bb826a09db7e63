fn main() {
    std::process::exit(mmq_cli::run(std::env::args().collect()));
}
