fn main() {
    std::process::exit(asca::cli::dispatch(std::env::args_os()));
}
