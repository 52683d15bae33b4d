//! Experiment runner on top of `moyal-core`.
//!
//! A run is described by one strict JSON [`ExperimentConfig`]. It evolves
//! the same initial field with any of the classical, quantum and
//! decoherent engines, samples scalar diagnostics, derives Lyapunov
//! exponents, break times and diffusion coefficients, and writes
//!
//! * `diagnostics.ndjson`: one `{"t","engine","diagnostic","value"}` object
//!   per line, byte-identical for identical configs;
//! * `report.json`: resolved config, derived scalars, metadata, warnings;
//! * `config.json`: the resolved config alone, ready to replay;
//! * `snapshots/<engine>-<step>.bin`: raw little-endian `f64` fields in
//!   x-major order, each with a JSON sidecar carrying the grid and a
//!   SHA-256 of the binary.
//!
//! Sweeps repeat a run over a list of values of one parameter and add an
//! `aggregate.json` table.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{DiagnosticKind, EngineKind, ExperimentConfig};
pub use error::{LabError, LabResult};
pub use run::{run_experiment, run_lyapunov, validate, RunOptions, RunReport};
pub use sweep::{run_sweep, AggregateRow, SweepOutcome};

/// Directory holding the bundled recipe configs.
pub fn recipes_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("recipes")
}
