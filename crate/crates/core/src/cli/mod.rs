//! Configuration-driven front end behind the `gfix` binary.
//!
//! A scenario is a TOML file (see [`config`]) or the name of a built-in
//! scenario. Each command returns a [`RunReport`] whose `exit_code` follows
//! the contract: 0 when every requested check passes, 1 when a check fails,
//! 2 for configuration errors.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::path::Path;

pub use commands::{cmd_check, cmd_solve, cmd_table, Overrides};
pub use config::ScenarioConfig;
pub use report::RunReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Built-in scenarios as `(name, toml)`.
pub const BUILTIN: [(&str, &str); 4] = [
    ("example-2.6", include_str!("../../scenarios/example-2.6.toml")),
    ("example-2.6-sum", include_str!("../../scenarios/example-2.6-sum.toml")),
    ("table-3pt", include_str!("../../scenarios/table-3pt.toml")),
    ("discrete-3pt", include_str!("../../scenarios/discrete-3pt.toml")),
];

/// A configuration problem; always exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::config(e.to_string())
    }
}

pub fn builtin(name: &str) -> Option<ScenarioConfig> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_toml(text).expect("built-in scenarios parse"))
}

/// Reads a scenario from a built-in name or a TOML file path.
pub fn load_scenario(source: &str) -> Result<ScenarioConfig, CliError> {
    if let Some(cfg) = builtin(source) {
        return Ok(cfg);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| {
        let names: Vec<&str> = BUILTIN.iter().map(|(n, _)| *n).collect();
        CliError::config(format!(
            "cannot read `{source}`: {e} (built-in scenarios: {})",
            names.join(", ")
        ))
    })?;
    ScenarioConfig::from_toml(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Solve,
    Table,
}

/// Loads, applies overrides and runs one command.
pub fn run(command: Command, source: &str, overrides: &Overrides) -> Result<RunReport, CliError> {
    let cfg = overrides.apply(load_scenario(source)?)?;
    match command {
        Command::Check => cmd_check(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Table => cmd_table(cfg),
    }
}
