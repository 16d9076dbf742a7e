//! Library side of the survcop command-line tool; the binary in `main.rs`
//! is a thin argument parser over these command implementations.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_evaluate, cmd_fit, cmd_predict, cmd_scan, cmd_simulate, scan, SimulateArgs,
};
pub use config::RunConfigFile;
