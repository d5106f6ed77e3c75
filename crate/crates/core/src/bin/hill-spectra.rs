fn main() {
    std::process::exit(hill_spectra::cli::run(std::env::args_os()));
}
