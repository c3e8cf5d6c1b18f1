//! Command-line entry points and the HTTP JSON API over the pcpriv workbench.

pub mod commands;
pub mod server;

pub use commands::{run, Cli, Command};
pub use server::router;
