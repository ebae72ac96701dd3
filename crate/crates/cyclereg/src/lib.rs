//! File formats, configuration, benchmark drivers and the command-line
//! front end for `cyclereg-core`.

pub mod cli;
mod commands;
pub mod config;
pub mod eval;
pub mod formats;
pub mod parallel;
pub mod timing;

pub use cli::{run, Cli};
