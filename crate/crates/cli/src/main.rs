use clap::Parser;
use privsprt_cli::{execute_with_threads, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute_with_threads(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
