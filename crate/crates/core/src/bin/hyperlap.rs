use std::process::ExitCode;

use clap::Parser;
use hyperlap::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            let rec = serde_json::json!({"command": cli.command.name(), "error": e.to_string()});
            eprintln!("{rec}");
            return ExitCode::from(2);
        }
    };
    let text = report.render(cli.params.format);
    match &cli.params.output {
        Some(path) => {
            // write to a sibling temp file first so a failed run never leaves a partial report
            let tmp = path.with_extension("partial");
            if let Err(e) = std::fs::write(&tmp, &text).and_then(|_| std::fs::rename(&tmp, path)) {
                eprintln!(
                    "{}",
                    serde_json::json!({"command": cli.command.name(), "error": e.to_string()})
                );
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
