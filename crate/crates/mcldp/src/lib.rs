//! Sweep runner, config files and result tables for `mcldp-core`.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{parse_config, parse_str, Axis, Coded, ConfigError, Scale, SweepSpec};
pub use output::{emit, emit_to_path, read_csv, read_json, Format};
pub use sweep::{run_sweep, Row, SweepOutcome};
