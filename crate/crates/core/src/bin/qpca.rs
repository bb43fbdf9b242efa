use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qpca_eeg::cli::{run, Cli};
use qpca_eeg::Error;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            // ignore a closed stdout
            let mut out = std::io::stdout().lock();
            for line in &summary.lines {
                let _ = writeln!(out, "{}: {line}", summary.command);
            }
            for path in &summary.outputs {
                let _ = writeln!(out, "wrote {}", path.display());
            }
            if summary.partial_failures > 0 {
                let _ = writeln!(out, "{}: {} partial failures recorded in the outputs", summary.command, summary.partial_failures);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
