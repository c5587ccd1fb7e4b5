//! Command-line front end: configuration, CSV tables and SVG charts.

pub mod app;
pub mod config;
pub mod error;
pub mod svg;
pub mod table;

pub use app::main_with;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
