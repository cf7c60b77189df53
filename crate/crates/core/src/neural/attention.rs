use super::mlp::{axpy, dot};
use super::{check_dim, leaky_relu, leaky_relu_grad, NeuralError};
use rand::Rng;

/// Attention of one agent over the embeddings of the others:
/// `x = Σ_j α_j σ(V g_j)` with `α = softmax_j(W_q g · W_k g_j / √d_k)`.
///
/// Matrices are stored column-major in one flat vector: `W_q`, `W_k`, `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionHead {
    embed: usize,
    key_dim: usize,
    value_dim: usize,
    params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AttentionTrace {
    query: Vec<f64>,
    keys: Vec<Vec<f64>>,
    weights: Vec<f64>,
    value_pre: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl AttentionTrace {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// `V g_j` for each other agent, before the activation.
    pub fn value_pre(&self) -> &[Vec<f64>] {
        &self.value_pre
    }
}

/// `M x` for a column-major `rows × x.len()` block.
fn matvec(block: &[f64], rows: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; rows];
    for (c, &v) in x.iter().enumerate() {
        if v != 0.0 {
            axpy(&mut y, v, &block[c * rows..(c + 1) * rows]);
        }
    }
    y
}

/// `Mᵀ u` for a column-major `u.len() × cols` block.
fn matvec_t(block: &[f64], cols: usize, u: &[f64]) -> Vec<f64> {
    let rows = u.len();
    (0..cols).map(|c| dot(&block[c * rows..(c + 1) * rows], u)).collect()
}

/// Adds `u ⊗ x` into a column-major `u.len() × x.len()` block.
fn outer_add(block: &mut [f64], u: &[f64], x: &[f64]) {
    let rows = u.len();
    for (c, &v) in x.iter().enumerate() {
        if v != 0.0 {
            axpy(&mut block[c * rows..(c + 1) * rows], v, u);
        }
    }
}

impl AttentionHead {
    pub fn zeros(embed: usize, key_dim: usize, value_dim: usize) -> Result<Self, NeuralError> {
        if embed == 0 || key_dim == 0 || value_dim == 0 {
            return Err(NeuralError::Shape);
        }
        Ok(AttentionHead {
            embed,
            key_dim,
            value_dim,
            params: vec![0.0; (2 * key_dim + value_dim) * embed],
        })
    }

    pub fn new<R: Rng + ?Sized>(
        embed: usize,
        key_dim: usize,
        value_dim: usize,
        rng: &mut R,
    ) -> Result<Self, NeuralError> {
        let mut head = Self::zeros(embed, key_dim, value_dim)?;
        let bound = 1.0 / (embed as f64).sqrt();
        for v in &mut head.params {
            *v = rng.gen_range(-bound..=bound);
        }
        Ok(head)
    }

    pub fn embed_dim(&self) -> usize {
        self.embed
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn query_range(&self) -> std::ops::Range<usize> {
        0..self.key_dim * self.embed
    }

    pub fn key_range(&self) -> std::ops::Range<usize> {
        self.key_dim * self.embed..2 * self.key_dim * self.embed
    }

    /// Flat range of the value transform `V`.
    pub fn value_range(&self) -> std::ops::Range<usize> {
        2 * self.key_dim * self.embed..self.params.len()
    }

    /// `(V g, σ(V g))`.
    pub fn value(&self, g: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NeuralError> {
        check_dim(self.embed, g.len())?;
        let pre = matvec(&self.params[self.value_range()], self.value_dim, g);
        let post = pre.iter().map(|&z| leaky_relu(z)).collect();
        Ok((pre, post))
    }

    /// Backpropagates `weight · upstream` through `σ(V g)`, adding into the
    /// `V` part of `grad`. Returns `∂L/∂g`.
    pub fn value_backward(
        &self,
        g: &[f64],
        value_pre: &[f64],
        upstream: &[f64],
        weight: f64,
        grad: &mut [f64],
    ) -> Result<Vec<f64>, NeuralError> {
        check_dim(self.params.len(), grad.len())?;
        check_dim(self.embed, g.len())?;
        check_dim(self.value_dim, upstream.len())?;
        let v_range = self.value_range();
        let d_pre: Vec<f64> = upstream
            .iter()
            .zip(value_pre)
            .map(|(u, &z)| weight * u * leaky_relu_grad(z))
            .collect();
        outer_add(&mut grad[v_range.clone()], &d_pre, g);
        Ok(matvec_t(&self.params[v_range], self.embed, &d_pre))
    }

    /// Mixes the other agents' embeddings as seen from `g_self`.
    pub fn mix(&self, g_self: &[f64], others: &[&[f64]]) -> Result<AttentionTrace, NeuralError> {
        check_dim(self.embed, g_self.len())?;
        if others.is_empty() {
            return Err(NeuralError::Dimension { expected: 1, got: 0 });
        }
        let query = matvec(&self.params[self.query_range()], self.key_dim, g_self);
        let scale = (self.key_dim as f64).sqrt();
        let mut keys = Vec::with_capacity(others.len());
        let mut scores = Vec::with_capacity(others.len());
        let mut value_pre = Vec::with_capacity(others.len());
        let mut values = Vec::with_capacity(others.len());
        for g in others {
            check_dim(self.embed, g.len())?;
            let k = matvec(&self.params[self.key_range()], self.key_dim, g);
            scores.push(dot(&query, &k) / scale);
            keys.push(k);
            let (pre, post) = self.value(g)?;
            value_pre.push(pre);
            values.push(post);
        }
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let weights: Vec<f64> = exps.iter().map(|e| e / total).collect();
        if others.len() == 1 {
            debug_assert_eq!(weights[0], 1.0);
        }
        let mut output = vec![0.0; self.value_dim];
        for (w, v) in weights.iter().zip(&values) {
            axpy(&mut output, *w, v);
        }
        Ok(AttentionTrace {
            query,
            keys,
            weights,
            value_pre,
            values,
            output,
        })
    }

    /// Backpropagates `upstream = ∂L/∂x`, adding parameter gradients into
    /// `grad`. Returns `(∂L/∂g_self, ∂L/∂g_j for each other agent)`.
    pub fn backward(
        &self,
        g_self: &[f64],
        others: &[&[f64]],
        trace: &AttentionTrace,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>), NeuralError> {
        check_dim(self.params.len(), grad.len())?;
        check_dim(self.value_dim, upstream.len())?;
        check_dim(trace.values.len(), others.len())?;
        let scale = (self.key_dim as f64).sqrt();
        let a: Vec<f64> = trace.values.iter().map(|v| dot(upstream, v)).collect();
        let mean: f64 = trace.weights.iter().zip(&a).map(|(w, x)| w * x).sum();
        let d_scores: Vec<f64> = trace
            .weights
            .iter()
            .zip(&a)
            .map(|(w, x)| w * (x - mean))
            .collect();

        let (q_range, k_range) = (self.query_range(), self.key_range());
        let mut d_query = vec![0.0; self.key_dim];
        let mut d_others = Vec::with_capacity(others.len());
        for (j, g) in others.iter().enumerate() {
            axpy(&mut d_query, d_scores[j] / scale, &trace.keys[j]);
            let d_key: Vec<f64> = trace.query.iter().map(|q| d_scores[j] * q / scale).collect();
            outer_add(&mut grad[k_range.clone()], &d_key, g);
            let mut d_g = matvec_t(&self.params[k_range.clone()], self.embed, &d_key);

            let d_v = self.value_backward(g, &trace.value_pre[j], upstream, trace.weights[j], grad)?;
            axpy(&mut d_g, 1.0, &d_v);
            d_others.push(d_g);
        }
        outer_add(&mut grad[q_range.clone()], &d_query, g_self);
        let d_self = matvec_t(&self.params[q_range], self.embed, &d_query);
        Ok((d_self, d_others))
    }
}
