fn main() {
    std::process::exit(psh_spectra::cli::main_with_args(std::env::args_os()));
}
