//! Library side of the `drosc` command: configuration, figure presets,
//! verification and file output.

pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod trajectory;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, Result};
