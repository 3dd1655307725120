use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use selfadj_cli::config::{CommandName, Format};
use selfadj_cli::{load, run, Overrides};

/// Self-adjoint extensions of 1-D Schrödinger operators: classification,
/// reference modes, bound states, scattering and wave-packet evolution.
#[derive(Debug, Parser)]
#[command(name = "selfadj", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Command to run, overriding the config.
    #[arg(long, value_enum)]
    command: Option<CommandName>,
    /// Output file, overriding the config (stdout when neither is set).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Suppress notes on stderr.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides { command: args.command, out: args.out, format: args.format };
    match load(&args.config).and_then(|cfg| run(cfg, &overrides)) {
        Ok(outcome) => {
            if let Some(text) = outcome.stdout {
                let _ = std::io::stdout().write_all(text.as_bytes());
            }
            if !args.quiet {
                for note in &outcome.notes {
                    eprintln!("{note}");
                }
                for p in &outcome.written {
                    eprintln!("wrote {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
