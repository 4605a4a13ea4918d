fn main() {
    std::process::exit(unitary_averages::cli::run(std::env::args_os()));
}
