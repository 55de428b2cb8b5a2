//! Graph convolutional networks on random graphs drawn from latent-space
//! models, together with their continuous limits, comparison metrics and
//! theoretical envelopes.

pub mod bounds;
pub mod cgcn;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
