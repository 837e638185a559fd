//! Configuration-driven sweeps over the boson and spin models, their CSV and
//! plot-script outputs, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod sweep;

pub use config::{Config, ConfigError};
pub use output::emit_outputs;
pub use sweep::{run_sweep, Row, Status, SweepOutput};
