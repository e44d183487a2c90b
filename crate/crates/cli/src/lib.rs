//! Command-line orchestration for SOS surface experiments: spec resolution,
//! validation, runs and their on-disk artifacts.

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod error;
pub mod params;
pub mod spec;
pub mod svg;

pub use args::Cli;
pub use artifacts::Manifest;
pub use commands::run;
pub use error::CliError;
pub use spec::{resolve, validate, ExperimentSpec};

use params::Params;

/// What a successful invocation produced.
#[derive(Debug)]
pub enum Outcome {
    /// `--validate-only` on a valid spec.
    Valid(ExperimentSpec),
    Ran(ExperimentSpec, Manifest),
}

/// Resolves and validates the spec, then runs it unless `--validate-only`.
pub fn execute(cli: &Cli, env_root: Option<&str>) -> Result<Outcome, CliError> {
    let params = match &cli.config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    let spec = resolve(cli, &params, env_root)?;
    if cli.validate_only {
        let violations = validate(&spec);
        return if violations.is_empty() {
            Ok(Outcome::Valid(spec))
        } else {
            Err(CliError::Validation(violations))
        };
    }
    let manifest = run(&spec)?;
    Ok(Outcome::Ran(spec, manifest))
}
