fn main() {
    std::process::exit(freshroute::cli::run(std::env::args_os()));
}
