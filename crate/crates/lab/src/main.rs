fn main() {
    std::process::exit(nslab::cli::run(std::env::args_os()));
}
