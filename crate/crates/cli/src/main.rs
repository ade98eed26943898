fn main() {
    std::process::exit(mwplast_cli::run_cli(std::env::args_os()));
}
