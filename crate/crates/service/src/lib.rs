//! Command-line and HTTP front ends for the tacit proof engine.

pub mod bench;
pub mod cli;
pub mod http;
