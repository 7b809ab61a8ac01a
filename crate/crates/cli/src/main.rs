fn main() {
    std::process::exit(odokit::run(std::env::args_os()));
}
