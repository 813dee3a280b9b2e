fn main() {
    std::process::exit(nodesel_cli::run(std::env::args_os()));
}
