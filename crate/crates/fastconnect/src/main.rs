use std::process;

fn main() {
    process::exit(fastconnect::cli::run_cli(std::env::args_os()));
}
