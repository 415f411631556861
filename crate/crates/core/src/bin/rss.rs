use clap::Parser;
use rational_sharing::cli::{execute, Cli, EXIT_CONFIG};

fn main() {
    let cli = Cli::parse();
    let outcome = execute(&cli.command);
    match &cli.output {
        Some(path) => {
            if let Err(e) = outcome.report.write(path) {
                eprintln!("rss: {e}");
                std::process::exit(EXIT_CONFIG);
            }
        }
        None => println!("{}", outcome.report.to_pretty()),
    }
    if let Some(err) = outcome.report.results.get("error").and_then(|e| e.as_str()) {
        eprintln!("rss: {err}");
    }
    std::process::exit(outcome.exit_code);
}
