mod config;
mod csvio;
mod figures;
mod runners;

use clap::Parser;

fn main() {
    let cli = config::Cli::parse();
    std::process::exit(match runners::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<config::ConfigError>() {
                2
            } else {
                1
            }
        }
    });
}
