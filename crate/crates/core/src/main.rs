fn main() {
    std::process::exit(dwtmark::cli::run(std::env::args_os()));
}
