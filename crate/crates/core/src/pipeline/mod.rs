//! Config-driven orchestration, reporting and batch prediction.

mod config;
mod predict;
mod report;
mod run;

pub use config::*;
pub use predict::{predict_csv, predict_file, PREDICTION_COLUMN, PROBABILITY_COLUMN};
pub use report::*;
pub use run::{execute, run, RunMode, RunOptions, RunOutput};
