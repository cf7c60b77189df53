//! Cross join of independently ranked single-sided counterfactuals.

use super::{CounterfactualRecord, MarlError, Method, PairContext, PairInstance, TrainConfig};
use crate::oracle::AffinityOracle;
use serde::{Deserialize, Serialize};

/// How a single-sided action is scored before the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointListScoring {
    /// `α_r · |F' − F| + own similarity term`.
    #[default]
    PlainDelta,
    /// `α_r · (F − F') + own similarity term`, rewarding affinity decreases.
    SignedDelta,
}

impl JointListScoring {
    fn score(self, alpha_r: f64, reference: f64, after: f64, sim_term: f64) -> f64 {
        let change = match self {
            JointListScoring::PlainDelta => (after - reference).abs(),
            JointListScoring::SignedDelta => reference - after,
        };
        alpha_r * change + sim_term
    }
}

fn top_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Takes the `k` best drug edits and the `k` best mutations by their
/// single-sided reward, evaluates all `k × k` joined pairs and keeps the `k`
/// with the highest full reward.
pub fn joint_list_baseline(
    pair: &PairInstance,
    oracle: &dyn AffinityOracle,
    config: &TrainConfig,
    k: usize,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    if k == 0 {
        return Err(MarlError::Config("k must be positive".into()));
    }
    let mut ctx = PairContext::new(pair, oracle, config)?;
    let w = config.weights;
    let scoring = config.joint_list_scoring;
    let drug_scores: Vec<f64> = ctx
        .drug_only
        .iter()
        .zip(&ctx.sim_drug)
        .map(|(&f, &s)| scoring.score(w.alpha_r, ctx.reference, f, w.alpha_d * s))
        .collect();
    let protein_scores: Vec<f64> = ctx
        .protein_only
        .iter()
        .zip(&ctx.sim_protein)
        .map(|(&f, &s)| scoring.score(w.alpha_r, ctx.reference, f, w.alpha_p * s))
        .collect();
    let drugs = top_indices(&drug_scores, k);
    let proteins = top_indices(&protein_scores, k);
    let mut joined = Vec::with_capacity(drugs.len() * proteins.len());
    for &i in &drugs {
        for &j in &proteins {
            joined.push((ctx.breakdown(i, j)?.reward, i, j));
        }
    }
    joined.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    joined
        .into_iter()
        .take(k)
        .map(|(_, i, j)| ctx.record(Method::Jointlist, i, j, 0))
        .collect()
}
