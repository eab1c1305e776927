//! Command-line layer over [`seir_control`]: scenario files, CSV export,
//! and the `simulate` / `optimize` / `compare` subcommands.
//!
//! The binary (`seirctl`) is a thin wrapper around [`run::execute`]; the
//! logic lives here so it can be unit-tested.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod run;

pub use config::{ScenarioConfig, SolverChoice};
pub use error::CliError;
pub use run::{execute, Cli, Command, RunArgs};
