use std::process::ExitCode;

use clap::Parser;
use wml_cli::{run, threads_from_env, Cli, CliError, Outcome};

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    text.push('\n');
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner() -> Result<i32, CliError> {
    let cli = Cli::parse();
    let threads = threads_from_env(std::env::var("WML_THREADS").ok().as_deref())?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?;
    }
    let outcome = run(&cli)?;
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    emit(&cli, &outcome)?;
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
