use clap::Parser;
use cqnc_cli::args::Cli;
use cqnc_cli::commands::format;
use cqnc_cli::{exit, run, CliError, Output};
use std::io::Write;

fn write_out(cli: &Cli, out: Output) -> Result<(), CliError> {
    let bytes = match out {
        Output::Text(s) => s.into_bytes(),
        Output::Table { table, report } => {
            if let Some(r) = report {
                eprint!("{r}");
            }
            table.to_string(format(cli.format))?.into_bytes()
        }
    };
    match &cli.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli).and_then(|out| write_out(&cli, out)) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
