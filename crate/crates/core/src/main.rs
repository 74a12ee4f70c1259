fn main() {
    std::process::exit(privslice::cli::run(std::env::args_os()));
}
