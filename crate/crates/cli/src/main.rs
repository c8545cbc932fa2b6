fn main() {
    std::process::exit(sbm_spectra_cli::run(std::env::args_os()));
}
