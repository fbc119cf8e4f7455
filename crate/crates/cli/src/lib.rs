//! Batch runner for distributed least-squares network flows: JSON configs in,
//! JSON reports, trajectory CSVs and SVG plots out.

pub mod app;
pub mod config;
pub mod csv;
pub mod plot;
pub mod run;

pub use config::{parse_config, parse_config_with_mode, ConfigError, Mode, PlotSpec, RunConfig, SchemaError};
pub use plot::{emit_plot, PlotError};
pub use run::{run, RunContext, RunError, RunOutcome};
