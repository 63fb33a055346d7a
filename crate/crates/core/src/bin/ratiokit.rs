fn main() {
    std::process::exit(ratiokit::cli::run(std::env::args_os()));
}
