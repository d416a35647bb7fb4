use std::process::ExitCode;

use clap::Parser;
use pointdata_cli::{run, Cli, Format, EXIT_OK, EXIT_VIOLATIONS};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    match cli.format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&outcome.machine).expect("json value")
            );
        }
        Format::Text if outcome.code == EXIT_OK || outcome.code == EXIT_VIOLATIONS => {
            print!("{}", outcome.report)
        }
        Format::Text => eprint!("{}", outcome.report),
    }
    ExitCode::from(outcome.code as u8)
}
