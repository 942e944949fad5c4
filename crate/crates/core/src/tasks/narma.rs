//! NARMA-d sequence generation and the matching reservoir configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, SplitSizes, TaskInputs};
use crate::cluster::ClusterGraph;
use crate::error::{Error, Result};
use crate::reservoir::{
    fading_memory_lambda, EncodingConfig, InitialState, LambdaMode, ReservoirConfig, StepInput,
};

/// Recurrence constants `(α, β, γ, δ, μ, ν)` and the delay `d` of
///
/// ```text
/// ȳ_k = α·ȳ_{k−1} + β·ȳ_{k−1}·Σᵢ₌₁..d ȳ_{k−i} + γ·u_{k−1}·u_{k−d} + δ
/// u_k = μ + ν·s_k
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NarmaParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    pub delay: usize,
}

impl NarmaParams {
    /// The default constant set `(0.3, 0.05, 1.5, 0.1, 0, 0.2)` at delay `d`.
    pub fn with_delay(delay: usize) -> Result<Self> {
        if delay == 0 {
            return Err(Error::invalid_argument("NARMA delay must be >= 1"));
        }
        Ok(Self { alpha: 0.3, beta: 0.05, gamma: 1.5, delta: 0.1, mu: 0.0, nu: 0.2, delay })
    }
}

/// Iterates the recurrence over a given input sequence; all `ȳ` and `u`
/// history before the first step is zero.
pub fn narma_targets(inputs: &[f64], params: &NarmaParams) -> Result<Vec<f64>> {
    if params.delay == 0 {
        return Err(Error::invalid_argument("NARMA delay must be >= 1"));
    }
    let d = params.delay;
    // u[k] holds u_{k+1} in 1-based terms; indices at or before zero read 0.
    let u: Vec<f64> = inputs.iter().map(|s| params.mu + params.nu * s).collect();
    let u_at = |k1: isize| -> f64 {
        if k1 >= 1 {
            u[(k1 - 1) as usize]
        } else {
            0.0
        }
    };
    let mut y = Vec::with_capacity(inputs.len());
    let y_at = |y: &[f64], k1: isize| -> f64 {
        if k1 >= 1 {
            y[(k1 - 1) as usize]
        } else {
            0.0
        }
    };
    for k in 1..=inputs.len() as isize {
        let y_prev = y_at(&y, k - 1);
        let window: f64 = (1..=d as isize).map(|i| y_at(&y, k - i)).sum();
        let next = params.alpha * y_prev
            + params.beta * y_prev * window
            + params.gamma * u_at(k - 1) * u_at(k - d as isize)
            + params.delta;
        if !next.is_finite() || next.abs() > 1e6 {
            return Err(Error::Generation(format!(
                "NARMA-{d} recurrence diverged at step {k} (value {next})"
            )));
        }
        y.push(next);
    }
    Ok(y)
}

/// Inputs drawn i.i.d. uniform on (−1, 1) from the seeded stream, targets
/// iterated from zero initial history.
pub fn gen_narma(length: usize, seed: u64, params: &NarmaParams) -> Result<Dataset> {
    if length == 0 {
        return Err(Error::invalid_argument("length must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<f64> = (0..length).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let targets = narma_targets(&inputs, params)?;
    Ok(Dataset {
        inputs: TaskInputs::Scalars(inputs),
        targets,
        target_offset: 0,
        splits: SplitSizes::default(),
    })
}

/// Chain cluster at `T = 0.4`, vacuum start, per-mode `(αᵢ, βᵢ)` drawn
/// uniformly from (−0.2, 0.2); draws with `λ ≥ 1` at `s_max = 1` are rejected
/// and redrawn. Returns the accepted config and the rejection count.
pub fn narma_benchmark_config(n_modes: usize, seed: u64) -> Result<(ReservoirConfig, u32)> {
    if n_modes < 2 {
        return Err(Error::invalid_argument("NARMA benchmark needs n_modes >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = ClusterGraph::chain(n_modes)?;
    let mut rejections = 0u32;
    loop {
        let pairs: Vec<(f64, f64)> = (0..n_modes)
            .map(|_| (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)))
            .collect();
        let config = ReservoirConfig::new(
            graph.clone(),
            0.4,
            EncodingConfig::from_pairs(pairs)?,
            InitialState::Vacuum,
        )?;
        let lambda = fading_memory_lambda(&config, StepInput::Scalar(1.0), LambdaMode::Literal)?;
        if lambda < 1.0 {
            return Ok((config, rejections));
        }
        rejections += 1;
        if rejections >= 100 {
            return Err(Error::Configuration(format!(
                "100 consecutive encoding draws with λ ≥ 1 for N = {n_modes}"
            )));
        }
    }
}
