//! Command-line harness: config grammar, presets and reproducible experiment runs.

pub mod config;
pub mod error;
pub mod grammar;
pub mod presets;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_OK, EXIT_RESOURCE};
pub use presets::{find_preset, list_presets, preset_config, PRESETS};
pub use run::{default_out_dir, replay, run_experiment, RunManifest, RunOutcome};
