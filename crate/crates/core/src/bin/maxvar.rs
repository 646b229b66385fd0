fn main() {
    std::process::exit(maxvar::cli::run(std::env::args_os()));
}
