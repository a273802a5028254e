pub mod embeddings;
pub mod error;
pub mod expectation;
pub mod experiments;
pub mod integration;
pub mod model;
pub mod norms;
pub mod rng;

pub use error::{Error, Result};
