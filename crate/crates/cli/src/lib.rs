//! Library side of the `tamelab` binary: run configuration, subcommand bodies and the
//! acceptance experiments.

pub mod commands;
pub mod config;
pub mod suite;
