//! Simulation models and benchmark studies.

pub mod models;
pub mod studies;

pub use models::{generate, generate_model, Generator, SimModel};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown simulation model `{0}`")]
    UnknownModel(String),
}
