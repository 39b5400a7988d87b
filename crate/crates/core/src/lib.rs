//! Sparse kernel spectral clustering with incomplete Cholesky low-rank
//! training and reduced-set out-of-sample models.

pub mod bench;
pub mod cli;
pub mod data;
pub mod eigen;
pub mod error;
pub mod kernels;
pub mod lowrank;
pub mod metrics;
pub mod model;
pub mod modelfile;
pub mod selection;

pub use data::Dataset;
pub use error::{KscError, Result};
pub use kernels::{KernelKind, KernelSpec};
pub use model::{BiasVariant, Encoding, SparseKscModel, TrainConfig};
