pub mod commands;
pub mod config;
pub mod document;
pub mod svg;

pub use commands::{exit_code, run, Cli};
