//! File formats, parallel drivers and the experiment runner behind the
//! `lobsys` command-line tool.

pub mod commands;
pub mod config;
pub mod drivers;
pub mod formats;
pub mod plot;
pub mod reproduce;
pub mod targets;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
