fn main() {
    std::process::exit(bbspectra_cli::run(std::env::args_os()));
}
