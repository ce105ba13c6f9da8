//! IO, file formats and the command line for `dulac-core`.

pub mod cli;
pub mod config;
pub mod grammar;
pub mod json;
pub mod suite;
