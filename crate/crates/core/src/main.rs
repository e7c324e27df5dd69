fn main() {
    std::process::exit(viewpulse::cli::run(std::env::args_os()));
}
