//! Command-line front end: scenario files, subcommands, manifests and charts.

pub mod commands;
pub mod error;
pub mod scenario;
pub mod svg;

pub use commands::{replay, run, Invocation, RunManifest};
pub use error::{CliError, ExitStatus};
pub use scenario::{parse_scenario, serialize_scenario};
