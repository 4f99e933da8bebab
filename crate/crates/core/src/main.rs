use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sympar::cli::{configure_threads, error_line, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| {
        let cfg = RunConfig::from_cli(cli)?;
        run(&cfg)
    });
    match result {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let mut err = std::io::stderr().lock();
            match &report.artifact {
                Some(text) => {
                    let _ = err.write_all(report.summary.as_bytes());
                    let _ = out.write_all(text.as_bytes());
                }
                None => {
                    let _ = out.write_all(report.summary.as_bytes());
                    if let Some(p) = &report.written {
                        let _ = writeln!(err, "wrote {}", p.display());
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sympar: {}", error_line(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
