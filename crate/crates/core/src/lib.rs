//! Numerical laboratory for the rank of the product of weight matrices in
//! multi-layer networks trained with noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense matrices, SVD, numerical rank, the rank bump and the
//!   matrix cosine.
//! - [`netcore`]: networks, squared loss and three gradient paths.
//! - [`noisekit`]: gradient, input, output and dropout noise.
//! - [`trainer`]: gradient descent loops that record rank trajectories.
//! - [`datagen`]: certified synthetic data and low-rank initialisation.
//! - [`oracle`]: falsifiable numerical checks of the rank and noise identities.
//! - [`cli`]: recipes, CSV output and the `ranklab` command line.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod linalg;
pub mod netcore;
pub mod noisekit;
pub mod oracle;
pub mod trainer;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, RankTolerance};
pub use netcore::{Activation, ActivationKind, Dataset, LayerDims, NetworkWeights};
