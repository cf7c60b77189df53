use super::{AgentInputs, MarlError};
use crate::neural::{log_softmax_grad, softmax_policy, Mlp, MlpTrace, Optimizer};
use rand::Rng;

/// Scores every candidate action with one trunk and normalizes the scores
/// with a softmax, so the action space may change size between states.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    net: Mlp,
    temperature: f64,
}

/// Forward state kept for the gradient step.
pub struct PolicyEval {
    pub probs: Vec<f64>,
    traces: Vec<MlpTrace>,
}

impl PolicyNet {
    pub fn new<R: Rng + ?Sized>(
        input: usize,
        hidden: &[usize],
        temperature: f64,
        rng: &mut R,
    ) -> Result<Self, MarlError> {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Ok(PolicyNet {
            net: Mlp::new(&sizes, rng)?,
            temperature,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn evaluate(&self, inputs: &AgentInputs) -> Result<PolicyEval, MarlError> {
        let shared = self.net.first_partial(&inputs.policy_shared)?;
        let traces = inputs
            .policy_candidates
            .iter()
            .map(|c| self.net.trace(c, Some(&shared)))
            .collect::<Result<Vec<_>, _>>()?;
        let logits: Vec<f64> = traces.iter().map(|t| t.output()[0]).collect();
        let probs = softmax_policy(&logits, &vec![true; logits.len()], self.temperature)?;
        Ok(PolicyEval { probs, traces })
    }

    pub fn probabilities(&self, inputs: &AgentInputs) -> Result<Vec<f64>, MarlError> {
        Ok(self.evaluate(inputs)?.probs)
    }

    /// Gradient of `−signal · log π(chosen)` with respect to the parameters.
    pub fn surrogate_grad(
        &self,
        inputs: &AgentInputs,
        eval: &PolicyEval,
        chosen: usize,
        signal: f64,
    ) -> Result<Vec<f64>, MarlError> {
        let n = eval.probs.len();
        if chosen >= n {
            return Err(MarlError::ActionIndex { index: chosen, count: n });
        }
        if eval.probs[chosen] <= 0.0 {
            return Err(MarlError::ZeroProbability(chosen));
        }
        let mut grad = vec![0.0; self.net.param_count()];
        if signal == 0.0 {
            return Ok(grad);
        }
        let d_logits = log_softmax_grad(&eval.probs, chosen, self.temperature);
        let mut shared_delta = vec![0.0; self.net.sizes()[1]];
        for (k, &d) in d_logits.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let delta0 = self
                .net
                .backward(&inputs.policy_candidates[k], &eval.traces[k], &[-signal * d], &mut grad)?;
            for (acc, v) in shared_delta.iter_mut().zip(&delta0) {
                *acc += v;
            }
        }
        self.net.accumulate_first(&inputs.policy_shared, &shared_delta, &mut grad)?;
        Ok(grad)
    }
}

/// `θ ← θ + α · Q · ∇_θ log π_θ(a|s)`, taken as a descent step on
/// `−Q · log π_θ(a|s)` with the optimizer's learning rate.
pub fn policy_update(
    policy: &mut PolicyNet,
    inputs: &AgentInputs,
    chosen: usize,
    q: f64,
    optimizer: &mut Optimizer,
) -> Result<(), MarlError> {
    let eval = policy.evaluate(inputs)?;
    let grad = policy.surrogate_grad(inputs, &eval, chosen, q)?;
    optimizer.step(policy.net.params_mut(), &grad)?;
    Ok(())
}
