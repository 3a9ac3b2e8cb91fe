//! Library surface of the `ergodikit` binary: configuration, file formats,
//! and the command implementations, so integration tests can drive commands
//! without spawning processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod svg;
