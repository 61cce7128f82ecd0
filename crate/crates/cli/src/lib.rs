//! Command-line surface for the capture-survey library: file formats,
//! configuration, rendering and the command implementations themselves.
//!
//! Exposed as a library so integration tests can drive commands without
//! spawning processes.

pub mod app;
pub mod config;
pub mod io;
pub mod render;
