use super::{check_dim, NeuralError};

/// Masked softmax over `logits / temperature`. Masked entries get exactly 0.
pub fn softmax_policy(logits: &[f64], mask: &[bool], temperature: f64) -> Result<Vec<f64>, NeuralError> {
    check_dim(logits.len(), mask.len())?;
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l / temperature)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(NeuralError::FullyMasked);
    }
    let mut probs: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l / temperature - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// `∂ log π(chosen) / ∂ logits` for `π = softmax(logits / temperature)`.
pub fn log_softmax_grad(probs: &[f64], chosen: usize, temperature: f64) -> Vec<f64> {
    probs
        .iter()
        .enumerate()
        .map(|(k, &p)| ((k == chosen) as u8 as f64 - p) / temperature)
        .collect()
}
