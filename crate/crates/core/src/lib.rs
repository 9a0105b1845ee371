//! Regularization learning networks.
//!
//! Feedforward regression networks where every weight carries its own
//! log-space regularization coefficient. Coefficients are tuned during training
//! by gradient steps on the counterfactual loss (the loss on the next batch
//! after a regularized weight step), with a mean-shift projection keeping their
//! average pinned at `theta`.

pub mod analysis;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod model_io;
pub mod network;
pub mod regularizer;
pub mod seed;
pub mod trainer;

pub use error::{Error, Result};
