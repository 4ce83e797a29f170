//! Configuration and output formats of the `mhd` command-line driver.

pub mod config;
pub mod output;
