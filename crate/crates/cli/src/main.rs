use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use sos_cli::spec::OUTPUT_ROOT_ENV;
use sos_cli::{execute, Cli, Outcome};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let env_root = std::env::var(OUTPUT_ROOT_ENV).ok();
    match execute(&cli, env_root.as_deref()) {
        Ok(Outcome::Valid(spec)) => {
            println!("{}", json!({ "valid": true, "command": spec.task.name(), "violations": [] }));
            ExitCode::SUCCESS
        }
        Ok(Outcome::Ran(spec, manifest)) => {
            println!(
                "{}",
                json!({
                    "command": spec.task.name(),
                    "out_dir": spec.out_dir.display().to_string(),
                    "complete": manifest.complete,
                    "artifacts": manifest.artifacts.len(),
                })
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::to_string(&e.record()).unwrap_or_else(|_| e.to_string());
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
