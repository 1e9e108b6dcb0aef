use clap::Parser;
use tsslab::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => print!("{}", out.stdout),
        Err(e) => {
            eprintln!("tsslab {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
