//! Library side of the `mmq` command-line tool.

pub mod acceptance;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, Result};

/// Parses `args` (including the program name), folds in a `--config`
/// file, and runs the command. Returns the exit status.
pub fn run(args: Vec<String>) -> i32 {
    use clap::Parser;

    let mut args = args;
    let entries = match config::take_config_path(&mut args).and_then(|p| match p {
        Some(p) => {
            let path = std::path::PathBuf::from(&p);
            let text = std::fs::read_to_string(&path)?;
            config::parse(&path, &text)
        }
        None => Ok(Vec::new()),
    }) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("mmq: {e}");
            return 2;
        }
    };
    config::merge(&mut args, &entries);
    let cli = match cli::Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(&cli.cmd) {
        Ok(code) => code,
        // Reader went away (`mmq ... | head`); nothing left to report.
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("mmq: {e}");
            2
        }
    }
}
