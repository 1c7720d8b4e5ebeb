use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rdflb_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("rdflb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
