//! Constraint-governed machine learning on tabular data.
//!
//! The crate is organised along the lifecycle of a tabular ML project:
//!
//! - [`tabular`]: immutable datasets, CSV ingestion, descriptive statistics, splits
//! - [`constraints`]: the `.cmc` requirements language, its evaluator and the quality scorecard
//! - [`engineering`]: imputation, scaling, one-hot encoding, and the pedigree score
//! - [`learners`]: losses, gradient descent and the from-scratch model families
//! - [`evaluation`]: metrics, cross-validation, bootstrap, grid search, gates
//! - [`pipeline`]: configuration, the phase orchestrator, reports and batch prediction

// Negated float comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod engineering;
pub mod error;
pub mod evaluation;
pub mod learners;
pub mod matrix;
pub mod pipeline;
pub mod tabular;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tabular::{Cell, Dataset, FeatureKind, FeatureMeta, FeatureRole};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one RNG used across the crate, so every seeded path is reproducible.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
