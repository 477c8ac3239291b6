fn main() {
    std::process::exit(bore_lab::cli::run(std::env::args_os()));
}
