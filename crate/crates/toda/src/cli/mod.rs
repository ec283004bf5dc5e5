//! Batch front end: configuration, command dispatch and report output.

mod commands;
mod config;
mod output;
mod verify;

pub use commands::{cmd_monodromy, cmd_rh_map, cmd_spectrum, cmd_yangyang};
pub use config::{Command, ConfigOverrides, DebugHooks, Format, GridOverride, OutputSpec, RunConfig, Tolerances};
pub use output::{destination, emit, to_value, CommandOutput, Report, OUT_DIR_VAR};
pub use verify::{cmd_verify, run_suite, InvariantResult, VerifyOptions, DEFAULT_SEED};

use crate::error::{Result, TodaError};

/// Process exit status for a configuration problem.
pub const EXIT_CONFIG: i32 = 2;
/// Process exit status for a numerical failure or a failed invariant.
pub const EXIT_NUMERICAL: i32 = 3;

/// Validates the configuration and runs its command.
pub fn run(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    match cfg.command {
        Some(Command::Spectrum) => cmd_spectrum(cfg),
        Some(Command::RhMap) => cmd_rh_map(cfg),
        Some(Command::Monodromy) => cmd_monodromy(cfg),
        Some(Command::Yangyang) => cmd_yangyang(cfg),
        Some(Command::Verify) => cmd_verify(cfg),
        None => Err(TodaError::Config("no command given".into())),
    }
}

pub fn exit_code(err: &TodaError) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Error report written to stderr, tagged with the failing stage.
pub fn error_report(cfg: Option<&RunConfig>, err: &TodaError) -> serde_json::Value {
    serde_json::json!({
        "error": {
            "kind": if err.is_config() { "config" } else { "numerical" },
            "command": cfg.and_then(|c| c.command).map(|c| c.name()),
            "message": err.to_string(),
            "exit_code": exit_code(err),
        }
    })
}
