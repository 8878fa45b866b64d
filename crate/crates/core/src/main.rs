fn main() {
    std::process::exit(mzi_eraser::cli::run(std::env::args_os()));
}
