//! File formats, run configuration and subcommands around
//! [`propprobe_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod model_io;
pub mod parallel;
pub mod report;
pub mod tables;
pub mod word2vec;

pub use config::RunConfig;
pub use error::{Error, FormatError, Result};
