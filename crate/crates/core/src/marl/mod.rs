//! Environment, actor-critic agents and the three counterfactual generators:
//! the attention-coupled two-agent trainer, its independent-critic ablation,
//! and the cross-joined single-agent lists.

mod critic;
mod env;
mod features;
mod joint_list;
mod policy;
mod record;
mod replay;
mod trainer;

pub use critic::{CriticBatch, CriticGrads, Coupling, MaacCritic, Side};
pub use env::{env_step, EnvState, Environment, StepOutcome};
pub use features::{AgentInputs, JointInputs, ObservationSpec};
pub use joint_list::{joint_list_baseline, JointListScoring};
pub use policy::{policy_update, PolicyNet};
pub use record::{harvest, AuditError, CounterfactualRecord, Mutation};
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{
    q_loss, train_macda, train_mameg, Learner, PairContext, PairInstance, RewardSource, Visit,
};

use crate::actionspace::{ActionError, DEFAULT_ADMISSIBLE};
use crate::molgraph::{Element, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};
use crate::neural::{NeuralError, OptimizerKind};
use crate::oracle::OracleError;
use crate::reward::{RewardError, RewardWeights, SignScope};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error("the {0} agent has no available actions")]
    EmptyActionSpace(Side),
    #[error("episode already finished; reset before stepping again")]
    Terminal,
    #[error("{0} action does not apply to the current state")]
    InvalidAction(Side),
    #[error("chosen action {0} has zero probability under the policy")]
    ZeroProbability(usize),
    #[error("action index {index} out of range for {count} candidates")]
    ActionIndex { index: usize, count: usize },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("stored SMILES does not parse: {0}")]
    Smiles(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Macda,
    Mameg,
    Jointlist,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Macda => "MACDA",
            Method::Mameg => "MA-MEG",
            Method::Jointlist => "Joint-List",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "macda" => Ok(Method::Macda),
            "mameg" => Ok(Method::Mameg),
            "jointlist" => Ok(Method::Jointlist),
            _ => Err(format!("unknown method {s:?} (expected macda, mameg or jointlist)")),
        }
    }
}

fn default_gamma() -> f64 {
    0.99
}
fn default_batch() -> usize {
    1024
}
fn default_lr() -> f64 {
    1e-3
}
fn default_episodes() -> usize {
    10_000
}
fn default_hidden() -> Vec<usize> {
    vec![128, 128]
}
fn default_temperature() -> f64 {
    1.0
}
fn default_top_k() -> usize {
    10
}
fn default_admissible() -> Vec<Element> {
    DEFAULT_ADMISSIBLE.to_vec()
}
fn default_fp_bits() -> usize {
    DEFAULT_FP_BITS
}
fn default_fp_radius() -> usize {
    DEFAULT_FP_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub policy_lr: f64,
    #[serde(default = "default_lr")]
    pub critic_lr: f64,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: RewardWeights,
    #[serde(default)]
    pub sign_scope: SignScope,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_admissible")]
    pub admissible: Vec<Element>,
    /// Observation fingerprint width and radius.
    #[serde(default = "default_fp_bits")]
    pub fp_bits: usize,
    #[serde(default = "default_fp_radius")]
    pub fp_radius: usize,
    #[serde(default)]
    pub joint_list_scoring: JointListScoring,
    /// Keep the attention value transform at zero and never update it.
    #[serde(default)]
    pub freeze_attention_value: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MarlError> {
        let bad = |msg: String| Err(MarlError::Config(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} outside (0, 1]", self.gamma));
        }
        if self.episodes == 0 {
            return bad("episodes must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        for (name, lr) in [("policy_lr", self.policy_lr), ("critic_lr", self.critic_lr)] {
            if !(lr.is_finite() && lr > 0.0) {
                return bad(format!("{name} {lr} must be positive"));
            }
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return bad(format!("temperature {} must be positive", self.temperature));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden sizes must be a nonempty list of positive integers".into());
        }
        if self.top_k == 0 {
            return bad("top_k must be positive".into());
        }
        if self.admissible.is_empty() {
            return bad("admissible element list is empty".into());
        }
        if self.fp_bits == 0 {
            return bad("fp_bits must be positive".into());
        }
        self.weights.validate()?;
        Ok(())
    }

    pub fn observation(&self) -> ObservationSpec {
        ObservationSpec {
            fp_bits: self.fp_bits,
            fp_radius: self.fp_radius,
        }
    }
}
