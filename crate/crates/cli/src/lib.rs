//! Configuration, presets and output for the `wavepacket` command.

pub mod config;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use manifest::{read_manifest, verify_dir, Mismatch, RunManifest};
pub use presets::{Params, Preset};
pub use run::{run_experiment, RunError};
