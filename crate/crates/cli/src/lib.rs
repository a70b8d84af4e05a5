//! Command-line experiments built on the `maternact` library.

pub mod cli;
pub mod commands;
pub mod experiments;
