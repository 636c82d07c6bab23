//! Library surface of the CLI: configuration schema, named presets, command
//! implementations, and output writers. The `hybridoptomech` binary is a thin
//! argument-parsing layer over this.

pub mod commands;
pub mod config;
pub mod output;
