//! Measurement-based quantum reservoir computing on continuous-variable
//! cluster states, simulated exactly in the Gaussian symplectic formalism.
//!
//! The crate is organized bottom-up:
//!
//! - [`gaussian`]: N-mode Gaussian states, symplectic gate matrices, loss
//!   channels and spectral checks.
//! - [`cluster`]: resource cluster graphs (chain, ring, 2NN, custom).
//! - [`reservoir`]: the teleportation-based step map, sequence runners,
//!   fading-memory analysis and a sampled conditional-state test oracle.
//! - [`readout`]: linear / logistic / softmax readout training and metrics.
//! - [`tasks`]: benchmark generators (temporal XOR, static XOR, NARMA-d,
//!   MNIST) with their fixed reservoir configurations.

pub mod cluster;
pub mod error;
pub mod gaussian;
pub mod readout;
pub mod reservoir;
pub mod tasks;

pub use cluster::{ClusterGraph, Edge};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, SymplecticGate};
pub use readout::{
    AdamParams, DesignMatrix, LogisticOptions, SoftmaxOptions, Standardizer, TrainReport,
    WeightInit, WeightSet,
};
pub use reservoir::{
    EncodingConfig, InitialState, LambdaMode, ObservableRecord, ReservoirConfig, StepInput,
};
pub use tasks::{Dataset, MnistImage, MnistTopology, NarmaParams, SplitSizes, TaskInputs};

/// Feature-ordering note stored alongside serialized weights.
pub const OBSERVABLE_ORDER: &str =
    "bias, then second-order x-moments as the upper triangle of O, row-major, diagonal first within each row";
