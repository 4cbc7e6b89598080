fn main() {
    std::process::exit(cdpsr::cli::run(std::env::args_os()));
}
