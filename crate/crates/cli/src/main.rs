mod args;
mod commands;
mod error;
mod io;
mod report;

use std::fs::File;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use extint_core::simulate::experiment::run_with_threads;

use args::{Cli, OutputArgs};
use error::CliError;
use report::{Report, RunManifest, SCHEMA};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("extint: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let out: &OutputArgs = &cli.output;
    let start = Instant::now();
    let outcome = run_with_threads(out.threads.unwrap_or(0), || commands::run(&cli.command))??;
    let elapsed = start.elapsed().as_secs_f64();

    if let Some(path) = &out.samples_csv {
        let rows =
            outcome.samples.as_ref().ok_or_else(|| CliError::Config("this subcommand produces no samples".into()))?;
        let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        io::write_samples(f, &outcome.columns, rows)?;
    }
    if out.samples && outcome.samples.is_none() {
        return Err(CliError::Config("this subcommand produces no samples".into()));
    }

    let report = Report {
        schema: SCHEMA,
        manifest: RunManifest {
            subcommand: commands::name(&cli.command),
            config: commands::resolved_config(&cli.command)?,
            master_seed: outcome.master_seed,
            version: extint_core::VERSION,
            runtime_secs: (!out.deterministic).then_some(elapsed),
        },
        results: outcome.results,
        samples: if out.samples { outcome.samples } else { None },
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}
