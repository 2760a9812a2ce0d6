//! Configuration handling and the subcommands behind the `ghz-lattice` binary.

pub mod commands;
pub mod config;

pub use commands::{run, Command, CommandOutcome};
pub use config::{parse_override, RunConfig, VERSION};
