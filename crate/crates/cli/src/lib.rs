//! Command-line front end and HTTP service for the `spmrf` library.

pub mod bench;
pub mod cli;
pub mod error;
pub mod seeds;
pub mod service;
pub mod synth;

pub use cli::run;
