use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gramcone_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAMCONE_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gramcone: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let cfg = cli.into_config()?;
    let outcome = run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &outcome.payload).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not worth a panic.
            let _ = out.write_all(outcome.payload.as_bytes()).and_then(|_| out.flush());
        }
    }
    Ok(outcome.exit_code)
}
