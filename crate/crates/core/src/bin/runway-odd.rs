fn main() {
    std::process::exit(runway_odd::cli::run(std::env::args_os()));
}
