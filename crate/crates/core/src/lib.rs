//! Feature selection driven by matrix-based Rényi α-entropy.
//!
//! Entropy, mutual information and conditional mutual information are
//! estimated from eigenspectra of normalized kernel Gram matrices, which
//! lets a greedy forward search maximize `I(S'; y)` over whole feature
//! groups and decide when to stop by monitoring the residual conditional
//! mutual information `I(S − S'; y | S')`.

pub mod cli;
pub mod data;
pub mod entropy;
pub mod error;
pub mod evaluation;
pub mod kernels;
pub mod report;
pub mod rng;
pub mod selection;
pub mod stats;
pub mod synthetic;

pub use data::{Dataset, DiscretizedView, LabelColumn};
pub use entropy::{Alpha, Eigenspectrum};
pub use error::{Error, Result};
pub use kernels::GramMatrix;
