//! Temporal and static XOR task generators and their reservoir configs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, SplitSizes, TaskInputs};
use crate::cluster::ClusterGraph;
use crate::error::{Error, Result};
use crate::reservoir::{EncodingConfig, InitialState, ReservoirConfig};

/// I.i.d. binary inputs with target `ȳ_k = XOR(s_k, s_{k−1})`; the first step
/// has no target.
pub fn gen_temporal_xor(length: usize, seed: u64) -> Result<Dataset> {
    if length < 2 {
        return Err(Error::invalid_argument("temporal XOR needs at least 2 steps"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<f64> = (0..length).map(|_| f64::from(rng.gen_bool(0.5))).collect();
    let targets: Vec<f64> = inputs
        .windows(2)
        .map(|w| f64::from(w[0] != w[1]))
        .collect();
    Ok(Dataset {
        inputs: TaskInputs::Scalars(inputs),
        targets,
        target_offset: 1,
        splits: SplitSizes::default(),
    })
}

/// The four binary input pairs with XOR targets, replicated `replicas` times
/// each (pattern order cycles so any prefix stays balanced).
pub fn gen_static_xor(replicas: usize) -> Result<Dataset> {
    if replicas == 0 {
        return Err(Error::invalid_argument("replicas must be >= 1"));
    }
    let patterns: [([f64; 2], f64); 4] = [
        ([0.0, 0.0], 0.0),
        ([0.0, 1.0], 1.0),
        ([1.0, 0.0], 1.0),
        ([1.0, 1.0], 0.0),
    ];
    let mut inputs = Vec::with_capacity(4 * replicas);
    let mut targets = Vec::with_capacity(4 * replicas);
    for _ in 0..replicas {
        for (pair, target) in &patterns {
            inputs.push(pair.to_vec());
            targets.push(*target);
        }
    }
    Ok(Dataset {
        inputs: TaskInputs::Vectors(inputs),
        targets,
        target_offset: 0,
        splits: SplitSizes::default(),
    })
}

/// The paper's temporal-XOR reservoir: two-mode chain, `T = 0.4`, input
/// encoded on the first detector only (`p̂₁' = p̂₁ + s·x̂₁/3`), vacuum start.
pub fn temporal_xor_benchmark_config() -> ReservoirConfig {
    ReservoirConfig::new(
        ClusterGraph::chain(2).expect("two-mode chain"),
        0.4,
        EncodingConfig::from_pairs(vec![(1.0 / 3.0, 0.0), (0.0, 0.0)]).expect("finite encoding"),
        InitialState::Vacuum,
    )
    .expect("valid fixed config")
}

/// The static-XOR reservoir: both detectors encode (`p̂ᵢ' = p̂ᵢ + sᵢ·x̂ᵢ/3`),
/// `T = 0.4`; the initial state decides whether the task is solvable.
pub fn static_xor_benchmark_config(initial_state: InitialState) -> ReservoirConfig {
    ReservoirConfig::new(
        ClusterGraph::chain(2).expect("two-mode chain"),
        0.4,
        EncodingConfig::uniform(2, 1.0 / 3.0, 0.0).expect("finite encoding"),
        initial_state,
    )
    .expect("valid fixed config")
}
