//! File formats, run configuration and command implementations on top of
//! `htrail-core`.

pub mod commands;
pub mod config;
mod error;
pub mod format;
pub mod model_file;
pub mod report;
pub mod session_file;

pub use error::{Error, Result};
