//! Library surface behind the `dwva` binary, exposed so integration tests
//! can drive sweeps and verification without spawning processes.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod sweep;
pub mod table;
pub mod verify;

pub use calibrate::Calibration;
pub use config::{preset, resolve, ExperimentConfig, RawConfig, SweepKind, SweepSpec};
pub use error::{CliError, Result};
pub use table::{OutputFormat, Table};
