//! Batch front door for the hyperstab toolkit: JSON experiment configs,
//! five subcommands, CSV/PGM artifacts and parameter sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use commands::{
    run_conjugacy, run_inverse_check, run_norms, run_splitting, run_sweep,
};
pub use config::{ExperimentConfig, Resolved, SweepSpec};
pub use error::{CliError, CliResult};
