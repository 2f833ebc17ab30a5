//! Experiment configuration, drivers and CSV output.

pub mod config;
pub mod csv;
pub mod experiments;
pub mod reference;

pub use config::{CalibrationMode, ExperimentConfig, ExperimentKind, PlatformSource};
pub use csv::{format_number, CsvTable};
pub use experiments::{execute, run, PlatformModel};
pub use reference::reference_cluster;
