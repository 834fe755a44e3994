mod args;
mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use config::ConfigError;

enum Failure {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

/// Resolves the config, runs it, and writes to `--out` if given. Returns
/// the rendered bytes.
fn invoke(cli: &Cli) -> Result<Vec<u8>, Failure> {
    let file = match &cli.common.config {
        Some(path) => config::load(path)?,
        None => Default::default(),
    };
    let (job, echo) = config::resolve(file.overlay(cli.flags()))?;
    if let Some(k) = echo.threads {
        // a second call in one process keeps the first pool; results do not
        // depend on it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    let bytes = run::render(&job, &echo).map_err(Failure::Runtime)?;
    if let Some(path) = &echo.out {
        std::fs::write(path, &bytes)
            .map_err(|e| Failure::Runtime(anyhow::anyhow!("{}: {e}", path.display())))?;
    }
    Ok(bytes)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match invoke(&cli) {
        Ok(bytes) => {
            if cli.common.out.is_none() {
                let _ = std::io::stdout().write_all(&bytes);
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(e)) => {
            eprintln!("stopkit: config error in {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("stopkit: {e:#}");
            ExitCode::from(1)
        }
    }
}
