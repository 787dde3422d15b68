//! Library surface of the `kkqkd` command-line tool: config schema,
//! presets, command implementations, and output plumbing. The binary in
//! `main.rs` is a thin argument-parsing wrapper over this.

pub mod commands;
pub mod config;
pub mod output;
