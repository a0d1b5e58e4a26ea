fn main() {
    std::process::exit(farsplit::cli::run(std::env::args_os()));
}
