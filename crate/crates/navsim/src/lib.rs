//! Host side of the navigation workbench: file formats, the session server
//! and the `navsim` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod protocol;
pub mod report;
pub mod server;
pub mod session;

pub use error::{Error, Result};
