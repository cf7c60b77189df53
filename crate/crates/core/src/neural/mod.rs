//! Small dense networks with hand-written reverse mode: MLPs, masked softmax
//! policies, attention over other agents' embeddings, and optimizers.
//!
//! Inputs are mostly fingerprint and sequence deltas with few nonzeros, so
//! the first layer accepts [`SparseVec`] inputs and skips zero columns.

mod attention;
mod checkpoint;
mod mlp;
mod optim;
mod softmax;

pub use attention::{AttentionHead, AttentionTrace};
pub use checkpoint::{read_checkpoint, write_checkpoint, Tensor};
pub use mlp::{Mlp, MlpTrace};
pub use optim::{Optimizer, OptimizerKind};
pub use softmax::{log_softmax_grad, softmax_policy};

use thiserror::Error;

/// Negative slope of the hidden activation.
pub const LEAKY_SLOPE: f64 = 0.01;

pub fn leaky_relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        LEAKY_SLOPE * z
    }
}

pub fn leaky_relu_grad(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("network needs at least an input and an output layer, all of positive size")]
    Shape,
    #[error("every action is masked")]
    FullyMasked,
    #[error("learning rate must be positive and finite, got {0}")]
    LearningRate(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), NeuralError> {
    if expected == got {
        Ok(())
    } else {
        Err(NeuralError::Dimension { expected, got })
    }
}

/// Sparse vector with sorted, unique indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn zeros(dim: usize) -> Self {
        SparseVec {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(x: &[f64]) -> Self {
        SparseVec {
            dim: x.len(),
            entries: x
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    /// Builds from unordered entries; duplicate indices are summed and zeros dropped.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, f64)>) -> Result<Self, NeuralError> {
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i >= dim) {
            return Err(NeuralError::Dimension { expected: dim, got: i + 1 });
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Ok(SparseVec { dim, entries: merged })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            x[i] = v;
        }
        x
    }

    /// Same entries placed at `offset` inside a vector of size `dim`.
    pub fn shifted(&self, offset: usize, dim: usize) -> Result<Self, NeuralError> {
        if offset + self.dim > dim {
            return Err(NeuralError::Dimension {
                expected: dim,
                got: offset + self.dim,
            });
        }
        Ok(SparseVec {
            dim,
            entries: self.entries.iter().map(|&(i, v)| (i + offset, v)).collect(),
        })
    }

    /// Concatenation `[a, b, ...]`.
    pub fn concat(parts: &[&SparseVec]) -> SparseVec {
        let mut dim = 0;
        let mut entries = Vec::new();
        for part in parts {
            entries.extend(part.entries.iter().map(|&(i, v)| (i + dim, v)));
            dim += part.dim;
        }
        SparseVec { dim, entries }
    }
}
