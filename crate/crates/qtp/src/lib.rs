//! Input format, trace serialization and the command line for `qtp-core`.

pub mod cli;
pub mod emit;
pub mod exec;
pub mod input;
