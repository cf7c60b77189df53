use super::{check_dim, NeuralError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// Gradient-descent state for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    steps: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, n_params: usize) -> Result<Self, NeuralError> {
        if !(lr.is_finite() && lr > 0.0) {
            return Err(NeuralError::LearningRate(lr));
        }
        let moments = if kind == OptimizerKind::Adam { n_params } else { 0 };
        Ok(Optimizer {
            kind,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            steps: 0,
            m: vec![0.0; moments],
            v: vec![0.0; moments],
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One descent step on `grads` (minimization).
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NeuralError> {
        check_dim(params.len(), grads.len())?;
        self.steps += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                check_dim(self.m.len(), params.len())?;
                let t = self.steps as i32;
                let c1 = 1.0 - self.beta1.powi(t);
                let c2 = 1.0 - self.beta2.powi(t);
                for k in 0..params.len() {
                    let g = grads[k];
                    self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
                    self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
                    let m_hat = self.m[k] / c1;
                    let v_hat = self.v[k] / c2;
                    params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
        }
        Ok(())
    }
}
