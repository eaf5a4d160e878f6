fn main() {
    std::process::exit(loglap_cli::dispatch(std::env::args_os()));
}
