//! Experiment harness around `psox-core`: config files, parallel batch runs,
//! trace bundles, statistical summaries and SVG plots.

pub mod analyze;
pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod plot;
pub mod sweep;

pub use analyze::{analyze_bundle, write_analysis, Analysis, AnalyzeOptions};
pub use config::{ExperimentConfig, Scale};
pub use error::{HarnessError, Result};
pub use experiment::{load_bundle, run_experiment, ResultsBundle, RunOptions};
pub use plot::plot_convergence;
pub use sweep::run_sweep;
