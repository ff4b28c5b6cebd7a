fn main() {
    std::process::exit(gpsim::cli::main_with_args(std::env::args_os()));
}
