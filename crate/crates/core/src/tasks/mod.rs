//! Benchmark task generators and their paper-specified reservoir
//! configurations: temporal XOR, static XOR, NARMA-d and MNIST.

mod mnist;
mod narma;
mod pipelines;
mod xor;

pub use mnist::{
    image_to_columns, mnist_benchmark_config, mnist_load, zoning2_compress, MnistImage,
    MnistTopology, MNIST_COLUMN_WASHOUT,
};
pub use narma::{gen_narma, narma_benchmark_config, narma_targets, NarmaParams};
pub use pipelines::{
    derive_seed, find_idx_file, mnist_image_features, narma_default_splits, run_mnist, run_narma,
    run_static_xor, run_temporal_xor, seed_purpose, static_xor_logistic_options,
    temporal_xor_default_splits, temporal_xor_logistic_options, MnistOutcome, MnistRunSpec,
    NarmaOutcome, StaticXorOutcome, TemporalXorOutcome, MNIST_FILES, STATIC_XOR_DEFAULT_SEED,
};
pub use xor::{
    gen_static_xor, gen_temporal_xor, static_xor_benchmark_config, temporal_xor_benchmark_config,
};

use std::io::Write;

use crate::error::{Error, Result};

/// Input sequence of a task: one scalar per step, or one vector per step.
#[derive(Clone, Debug, PartialEq)]
pub enum TaskInputs {
    Scalars(Vec<f64>),
    Vectors(Vec<Vec<f64>>),
}

impl TaskInputs {
    pub fn len(&self) -> usize {
        match self {
            TaskInputs::Scalars(v) => v.len(),
            TaskInputs::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Train/test layout over a generated sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitSizes {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

/// A paired input/target sequence. `targets[k - target_offset]` is the target
/// for step `k` (0-based); the first `target_offset` steps have none.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: TaskInputs,
    pub targets: Vec<f64>,
    pub target_offset: usize,
    pub splits: SplitSizes,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Target for step `k`, if defined.
    pub fn target(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.target_offset).and_then(|i| self.targets.get(i)).copied()
    }

    pub fn with_splits(mut self, splits: SplitSizes) -> Result<Self> {
        if splits.total() > self.len() {
            return Err(Error::invalid_argument(format!(
                "splits cover {} steps but the dataset has {}",
                splits.total(),
                self.len()
            )));
        }
        self.splits = splits;
        Ok(self)
    }

    /// CSV export with columns `step,input…,target` (step is 1-based; steps
    /// without a defined target leave the field empty).
    pub fn to_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        match &self.inputs {
            TaskInputs::Scalars(_) => writeln!(out, "step,input,target")?,
            TaskInputs::Vectors(v) => {
                let width = v.first().map_or(0, Vec::len);
                let headers: Vec<String> = (1..=width).map(|i| format!("input_{i}")).collect();
                writeln!(out, "step,{},target", headers.join(","))?;
            }
        }
        for k in 0..self.len() {
            let target = self.target(k).map_or(String::new(), |t| t.to_string());
            match &self.inputs {
                TaskInputs::Scalars(v) => writeln!(out, "{},{},{}", k + 1, v[k], target)?,
                TaskInputs::Vectors(v) => {
                    let fields: Vec<String> = v[k].iter().map(f64::to_string).collect();
                    writeln!(out, "{},{},{}", k + 1, fields.join(","), target)?;
                }
            }
        }
        Ok(())
    }
}
