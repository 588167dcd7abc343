use clap::Parser;

fn main() {
    let cli = quotasim::cli::Cli::parse();
    if let Err(e) = quotasim::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
