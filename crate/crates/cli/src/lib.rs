//! Configuration, serialization and subcommands of the `nrcg-battery` tool.

pub mod commands;
pub mod config;
pub mod heatmap;
pub mod output;
