use std::process::ExitCode;

use clap::Parser;
use gurarii_cli::files::to_json;
use gurarii_cli::{run, Cli, EXIT_FAIL, EXIT_PASS};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            print!("{}", to_json(&report));
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {}", c.name, c.detail);
            }
            let code = if report.pass { EXIT_PASS } else { EXIT_FAIL };
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
