use super::{check_dim, leaky_relu, leaky_relu_grad, NeuralError, SparseVec};
use rand::Rng;

/// Fully connected network with Leaky ReLU hidden layers and a linear output.
///
/// Parameters live in one flat vector. Layer `l` stores its weight matrix
/// column-major (`out × in`) followed by its bias, so one input column is a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    params: Vec<f64>,
}

/// Pre- and post-activation values of every layer for one input.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("at least one layer")
    }

    /// Pre-activations of every hidden (Leaky ReLU) layer.
    pub fn hidden_pre(&self) -> &[Vec<f64>] {
        &self.pre[..self.pre.len() - 1]
    }
}

impl Mlp {
    /// Zero-initialized network.
    pub fn zeros(sizes: &[usize]) -> Result<Self, NeuralError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NeuralError::Shape);
        }
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut total = 0;
        for w in sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            offsets,
            params: vec![0.0; total],
        })
    }

    /// Weights and biases drawn from `U(−1/√fan_in, 1/√fan_in)`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self, NeuralError> {
        let mut net = Self::zeros(sizes)?;
        for l in 0..net.layer_count() {
            let bound = 1.0 / (net.sizes[l] as f64).sqrt();
            let range = net.layer_range(l);
            for v in &mut net.params[range] {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    /// Single linear layer computing the identity map.
    pub fn identity(n: usize) -> Result<Self, NeuralError> {
        let mut net = Self::zeros(&[n, n])?;
        for i in 0..n {
            let k = net.weight_index(0, i, i);
            net.params[k] = 1.0;
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("validated")
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Flat range of layer `l`'s weights and bias.
    pub fn layer_range(&self, l: usize) -> std::ops::Range<usize> {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        self.offsets[l]..self.offsets[l] + n_in * n_out + n_out
    }

    /// Flat index of the weight from input `i` to output `o` of layer `l`.
    pub fn weight_index(&self, l: usize, o: usize, i: usize) -> usize {
        self.offsets[l] + i * self.sizes[l + 1] + o
    }

    pub fn bias_index(&self, l: usize, o: usize) -> usize {
        self.offsets[l] + self.sizes[l] * self.sizes[l + 1] + o
    }

    fn column(&self, l: usize, i: usize) -> &[f64] {
        let n_out = self.sizes[l + 1];
        let start = self.offsets[l] + i * n_out;
        &self.params[start..start + n_out]
    }

    /// Bias of the first layer.
    pub fn first_bias(&self) -> &[f64] {
        self.bias(0)
    }

    fn bias(&self, l: usize) -> &[f64] {
        let start = self.bias_index(l, 0);
        &self.params[start..start + self.sizes[l + 1]]
    }

    fn check_grad(&self, grad: &[f64]) -> Result<(), NeuralError> {
        check_dim(self.params.len(), grad.len())
    }

    /// `W₀ x` over input columns `col_offset..col_offset + x.len()`, no bias.
    pub fn first_partial_dense(&self, x: &[f64], col_offset: usize) -> Result<Vec<f64>, NeuralError> {
        if col_offset + x.len() > self.sizes[0] {
            return Err(NeuralError::Dimension {
                expected: self.sizes[0],
                got: col_offset + x.len(),
            });
        }
        let mut z = vec![0.0; self.sizes[1]];
        for (c, &v) in x.iter().enumerate() {
            if v != 0.0 {
                axpy(&mut z, v, self.column(0, col_offset + c));
            }
        }
        Ok(z)
    }

    /// `W₀ x` for a sparse input covering the full input width, no bias.
    pub fn first_partial(&self, x: &SparseVec) -> Result<Vec<f64>, NeuralError> {
        check_dim(self.sizes[0], x.dim())?;
        let mut z = vec![0.0; self.sizes[1]];
        for &(c, v) in x.entries() {
            axpy(&mut z, v, self.column(0, c));
        }
        Ok(z)
    }

    /// First-layer pre-activation `b₀ + W₀ x (+ shared)`.
    pub fn first_pre(&self, x: &SparseVec, shared: Option<&[f64]>) -> Result<Vec<f64>, NeuralError> {
        let mut z = self.first_partial(x)?;
        if let Some(s) = shared {
            check_dim(z.len(), s.len())?;
            axpy(&mut z, 1.0, s);
        }
        axpy(&mut z, 1.0, self.bias(0));
        Ok(z)
    }

    /// Runs the remaining layers from a first-layer pre-activation.
    pub fn trace_pre(&self, pre0: Vec<f64>) -> Result<MlpTrace, NeuralError> {
        check_dim(self.sizes[1], pre0.len())?;
        let layers = self.layer_count();
        let mut pre = Vec::with_capacity(layers);
        let mut post = Vec::with_capacity(layers);
        pre.push(pre0);
        for l in 0..layers {
            let a: Vec<f64> = if l + 1 == layers {
                pre[l].clone()
            } else {
                pre[l].iter().map(|&z| leaky_relu(z)).collect()
            };
            if l + 1 < layers {
                let mut z = self.bias(l + 1).to_vec();
                for (i, &v) in a.iter().enumerate() {
                    if v != 0.0 {
                        axpy(&mut z, v, self.column(l + 1, i));
                    }
                }
                pre.push(z);
            }
            post.push(a);
        }
        Ok(MlpTrace { pre, post })
    }

    pub fn trace(&self, x: &SparseVec, shared: Option<&[f64]>) -> Result<MlpTrace, NeuralError> {
        self.trace_pre(self.first_pre(x, shared)?)
    }

    pub fn forward_sparse(&self, x: &SparseVec) -> Result<Vec<f64>, NeuralError> {
        Ok(self.trace(x, None)?.post.pop().expect("nonempty"))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        check_dim(self.sizes[0], x.len())?;
        self.forward_sparse(&SparseVec::from_dense(x))
    }

    /// Backpropagates `upstream = ∂L/∂output` through every layer, adding
    /// parameter gradients into `grad` except the first layer's weights.
    /// Returns `∂L/∂pre₀`; pair it with one of the `accumulate_first_*`
    /// calls for the first-layer weights.
    pub fn backward_core(
        &self,
        trace: &MlpTrace,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>, NeuralError> {
        self.check_grad(grad)?;
        check_dim(self.output_dim(), upstream.len())?;
        let layers = self.layer_count();
        let mut delta = upstream.to_vec();
        for l in (1..layers).rev() {
            let n_out = self.sizes[l + 1];
            let input = &trace.post[l - 1];
            for (i, &a) in input.iter().enumerate() {
                if a != 0.0 {
                    let start = self.offsets[l] + i * n_out;
                    axpy(&mut grad[start..start + n_out], a, &delta);
                }
            }
            let b = self.bias_index(l, 0);
            axpy(&mut grad[b..b + n_out], 1.0, &delta);
            delta = (0..self.sizes[l])
                .map(|i| dot(self.column(l, i), &delta) * leaky_relu_grad(trace.pre[l - 1][i]))
                .collect();
        }
        let n1 = self.sizes[1];
        let b = self.bias_index(0, 0);
        axpy(&mut grad[b..b + n1], 1.0, &delta);
        Ok(delta)
    }

    /// Adds `delta₀ ⊗ x` into the first-layer weight gradient.
    pub fn accumulate_first(&self, x: &SparseVec, delta0: &[f64], grad: &mut [f64]) -> Result<(), NeuralError> {
        self.check_grad(grad)?;
        check_dim(self.sizes[0], x.dim())?;
        check_dim(self.sizes[1], delta0.len())?;
        let n1 = self.sizes[1];
        for &(c, v) in x.entries() {
            let start = self.offsets[0] + c * n1;
            axpy(&mut grad[start..start + n1], v, delta0);
        }
        Ok(())
    }

    /// Dense variant of [`Mlp::accumulate_first`] over a column block.
    pub fn accumulate_first_dense(
        &self,
        x: &[f64],
        col_offset: usize,
        delta0: &[f64],
        grad: &mut [f64],
    ) -> Result<(), NeuralError> {
        self.check_grad(grad)?;
        check_dim(self.sizes[1], delta0.len())?;
        if col_offset + x.len() > self.sizes[0] {
            return Err(NeuralError::Dimension {
                expected: self.sizes[0],
                got: col_offset + x.len(),
            });
        }
        let n1 = self.sizes[1];
        for (c, &v) in x.iter().enumerate() {
            if v != 0.0 {
                let start = self.offsets[0] + (col_offset + c) * n1;
                axpy(&mut grad[start..start + n1], v, delta0);
            }
        }
        Ok(())
    }

    /// `∂L/∂x` for input columns `col_offset..col_offset + len`.
    pub fn first_input_grad(&self, delta0: &[f64], col_offset: usize, len: usize) -> Vec<f64> {
        (col_offset..col_offset + len)
            .map(|c| dot(self.column(0, c), delta0))
            .collect()
    }

    /// Full backward pass for a sparse input.
    pub fn backward(
        &self,
        x: &SparseVec,
        trace: &MlpTrace,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>, NeuralError> {
        let delta0 = self.backward_core(trace, upstream, grad)?;
        self.accumulate_first(x, &delta0, grad)?;
        Ok(delta0)
    }

    /// Parameter and input gradients for a dense input.
    pub fn backward_dense(&self, x: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NeuralError> {
        check_dim(self.sizes[0], x.len())?;
        let sx = SparseVec::from_dense(x);
        let trace = self.trace(&sx, None)?;
        let mut grad = vec![0.0; self.params.len()];
        let delta0 = self.backward(&sx, &trace, upstream, &mut grad)?;
        let input_grad = self.first_input_grad(&delta0, 0, self.sizes[0]);
        Ok((grad, input_grad))
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
