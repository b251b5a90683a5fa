use clap::Parser;
use nlact_cli::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("nlact: {e}");
        std::process::exit(e.exit_code());
    }
}
