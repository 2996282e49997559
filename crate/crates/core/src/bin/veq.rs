fn main() {
    std::process::exit(veq::cli::run(std::env::args_os()));
}
