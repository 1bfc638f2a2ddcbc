//! File formats, flight-log ingestion and the command-line driver around
//! [`pcmkit_core`].

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod model_io;
pub mod report;

pub use error::{Error, Result};
pub use pcmkit_core as core;
