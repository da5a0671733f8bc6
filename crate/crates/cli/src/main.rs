mod cli;
mod commands;
mod svg;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};
use commands::EXIT_USAGE;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            std::process::exit(EXIT_USAGE);
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => commands::cmd_run(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Validate(args) => commands::cmd_validate(args),
        Command::Presets(args) => commands::cmd_presets(args),
    };
    let code = match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}
