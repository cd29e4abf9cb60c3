use clap::error::ErrorKind;
use clap::Parser;
use squidmw_cli::error::{error_document, CliError};
use squidmw_cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are success paths; everything else is usage.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let err = CliError::Usage(e.to_string());
            eprintln!("{}", error_document(&err));
            std::process::exit(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("{}", error_document(&err));
            std::process::exit(err.exit_code());
        }
    }
}
