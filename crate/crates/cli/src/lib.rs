//! Config-driven runner and file formats for the self-interference
//! cancellation simulator.

pub mod config;
pub mod runner;
pub mod sigfile;
pub mod sweep;
