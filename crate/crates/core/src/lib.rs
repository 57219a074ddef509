//! Survival trees grown with logrank splits (greedy or smooth-sigmoid
//! search), variable selection by intersected validation, leaf fusion along
//! an adaptive fused-lasso path, and bootstrap bias correction of the fused
//! group effects.

pub mod dataset;
pub mod error;
pub mod fusion;
pub mod inference;
pub mod iv;
pub mod linalg;
pub mod rng;
pub mod select;
pub mod split;
pub mod survival;
pub mod tree;

pub use dataset::{Covariate, CovariateKind, SampleIndex, Schema, SurvivalDataset, SurvivalRecord};
pub use error::{Error, Result};
pub use rng::Seed;
