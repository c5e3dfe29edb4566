//! Configuration, command dispatch, run manifests and the property battery
//! for the `chq` binary.

pub mod check;
pub mod commands;
pub mod config;
pub mod manifest;

pub use check::{run_battery, CheckOptions, CheckOutcome};
pub use commands::Failure;
pub use config::{parse_config, Config, ConfigError, PotentialSpec};
pub use manifest::RunManifest;
