use clap::Parser;

use legendrian_lab::cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(std::env::var("LEGLAB_THREADS").ok().as_deref()) {
        eprintln!("leglab: {e}");
        std::process::exit(2);
    }
    std::process::exit(run(&cli));
}
