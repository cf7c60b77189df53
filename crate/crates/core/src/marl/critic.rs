//! Attention critics for the drug and protein agents.
//!
//! `Q_i = f_i(g_i(s_i, a_i), x_i)` where `x_i = σ(V_i g_j(s_j, a_j))` mixes
//! the other agent's embedding. With two agents the attention weight over
//! the single other agent is 1, so `x_i` depends on the other agent's action
//! only. Batched updates exploit that: embeddings, value transforms and the
//! first layer of `f_i` are computed once per distinct action, leaving only
//! the upper layers of `f_i` per distinct pair.

use super::{JointInputs, MarlError};
use crate::neural::{AttentionHead, Mlp, MlpTrace, NeuralError, Optimizer, OptimizerKind};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Drug,
    Protein,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Drug => 0,
            Side::Protein => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Drug => Side::Protein,
            Side::Protein => Side::Drug,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Drug => "drug",
            Side::Protein => "protein",
        })
    }
}

/// How a critic sees the other agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `x_i` from attention over the other agent's embedding.
    Attention,
    /// `x_i = 0`: each critic sees only its own state and action.
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
struct Half {
    embed: Mlp,
    head: Mlp,
    attention: AttentionHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaacCritic {
    coupling: Coupling,
    freeze_value: bool,
    embed_dim: usize,
    halves: [Half; 2],
}

/// Gradients in block order `[g_d, f_d, attn_d, g_p, f_p, attn_p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticGrads {
    pub blocks: [Vec<f64>; 6],
}

/// Distinct `(drug, protein)` action pairs with their regression targets and
/// multiplicities. The loss is normalized by the total multiplicity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticBatch {
    pub entries: Vec<(usize, usize, f64, u32)>,
}

impl CriticBatch {
    /// Groups transitions by `(drug, protein, target)`.
    pub fn group<I: IntoIterator<Item = (usize, usize, f64)>>(items: I) -> Self {
        let mut counts: BTreeMap<(usize, usize, u64), u32> = BTreeMap::new();
        for (i, j, t) in items {
            *counts.entry((i, j, t.to_bits())).or_default() += 1;
        }
        CriticBatch {
            entries: counts
                .into_iter()
                .map(|((i, j, t), c)| (i, j, f64::from_bits(t), c))
                .collect(),
        }
    }

    pub fn total(&self) -> u32 {
        self.entries.iter().map(|e| e.3).sum()
    }
}

/// Per-side cache of embeddings for the distinct actions in a batch.
struct Embeddings {
    slot: BTreeMap<usize, usize>,
    actions: Vec<usize>,
    shared_pre: Vec<f64>,
    traces: Vec<MlpTrace>,
}

impl Embeddings {
    fn output(&self, s: usize) -> &[f64] {
        self.traces[s].output()
    }
}

/// Everything computed once per distinct action for one side's critic:
/// the own-embedding part `A = W_e g_i` and the mixing part `B = W_x x_i`
/// of the first layer of `f_i`, plus the value transform trace.
struct HeadCache {
    own: Vec<Vec<f64>>,
    mixed: Vec<Vec<f64>>,
    value_pre: Vec<Vec<f64>>,
    value_post: Vec<Vec<f64>>,
}

struct Forward {
    emb: [Embeddings; 2],
    heads: [HeadCache; 2],
}

impl MaacCritic {
    /// Draws every network from `rng` in the order `g, f, attention` for the
    /// drug side then the protein side. With `freeze_value` the value
    /// transforms are drawn (keeping the random stream aligned) and then
    /// zeroed.
    pub fn new<R: Rng + ?Sized>(
        drug_input: usize,
        protein_input: usize,
        hidden: &[usize],
        coupling: Coupling,
        freeze_value: bool,
        rng: &mut R,
    ) -> Result<Self, MarlError> {
        let e = *hidden.last().ok_or(NeuralError::Shape)?;
        let mut make = |input: usize| -> Result<Half, NeuralError> {
            let mut sizes = vec![input];
            sizes.extend_from_slice(hidden);
            let embed = Mlp::new(&sizes, rng)?;
            let head = Mlp::new(&[2 * e, e, 1], rng)?;
            let mut attention = AttentionHead::new(e, e, e, rng)?;
            if freeze_value {
                let r = attention.value_range();
                attention.params_mut()[r].fill(0.0);
            }
            Ok(Half {
                embed,
                head,
                attention,
            })
        };
        let drug = make(drug_input)?;
        let protein = make(protein_input)?;
        Ok(MaacCritic {
            coupling,
            freeze_value,
            embed_dim: e,
            halves: [drug, protein],
        })
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn embed_net(&self, side: Side) -> &Mlp {
        &self.halves[side.index()].embed
    }

    pub fn head_net(&self, side: Side) -> &Mlp {
        &self.halves[side.index()].head
    }

    pub fn attention(&self, side: Side) -> &AttentionHead {
        &self.halves[side.index()].attention
    }

    pub fn blocks(&self) -> [&[f64]; 6] {
        let [d, p] = &self.halves;
        [
            d.embed.params(),
            d.head.params(),
            d.attention.params(),
            p.embed.params(),
            p.head.params(),
            p.attention.params(),
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        let [d, p] = &mut self.halves;
        [
            d.embed.params_mut(),
            d.head.params_mut(),
            d.attention.params_mut(),
            p.embed.params_mut(),
            p.head.params_mut(),
            p.attention.params_mut(),
        ]
    }

    pub fn zero_grads(&self) -> CriticGrads {
        CriticGrads {
            blocks: self.blocks().map(|b| vec![0.0; b.len()]),
        }
    }

    /// One optimizer per parameter block.
    pub fn optimizers(&self, kind: OptimizerKind, lr: f64) -> Result<Vec<Optimizer>, MarlError> {
        self.blocks()
            .iter()
            .map(|b| Optimizer::new(kind, lr, b.len()).map_err(MarlError::from))
            .collect()
    }

    /// Single-pair critic value from dense inputs, computed directly:
    /// `g` on both sides, attention mix, concatenation, `f`.
    pub fn maac_q(&self, side: Side, own: &[f64], other: &[f64]) -> Result<f64, MarlError> {
        let me = &self.halves[side.index()];
        let them = &self.halves[side.other().index()];
        let g_own = me.embed.forward(own)?;
        let g_other = them.embed.forward(other)?;
        let x = match self.coupling {
            Coupling::Attention => {
                let trace = me.attention.mix(&g_own, &[&g_other])?;
                assert_eq!(trace.weights(), &[1.0], "one other agent gets all the attention");
                trace.output().to_vec()
            }
            Coupling::Independent => vec![0.0; self.embed_dim],
        };
        let mut input = g_own;
        input.extend_from_slice(&x);
        Ok(me.head.forward(&input)?[0])
    }

    /// Mean squared TD residual of both critics over `batch`, through
    /// [`MaacCritic::maac_q`].
    pub fn loss(&self, batch: &CriticBatch, inputs: &JointInputs) -> Result<f64, MarlError> {
        let total = batch.total() as f64;
        let mut loss = 0.0;
        for &(i, j, target, count) in &batch.entries {
            let xd = inputs.drug.critic_input(i);
            let xp = inputs.protein.critic_input(j);
            let qd = self.maac_q(Side::Drug, &xd, &xp)?;
            let qp = self.maac_q(Side::Protein, &xp, &xd)?;
            loss += count as f64 * ((qd - target).powi(2) + (qp - target).powi(2));
        }
        Ok(loss / total)
    }

    fn embeddings(&self, side: Side, actions: Vec<usize>, inputs: &JointInputs) -> Result<Embeddings, MarlError> {
        let agent = match side {
            Side::Drug => &inputs.drug,
            Side::Protein => &inputs.protein,
        };
        let net = &self.halves[side.index()].embed;
        let shared_pre = net.first_partial(&agent.critic_shared)?;
        let mut slot = BTreeMap::new();
        let mut traces = Vec::with_capacity(actions.len());
        for (s, &a) in actions.iter().enumerate() {
            let cand = agent.critic_candidates.get(a).ok_or(MarlError::ActionIndex {
                index: a,
                count: agent.len(),
            })?;
            slot.insert(a, s);
            traces.push(net.trace(cand, Some(&shared_pre))?);
        }
        Ok(Embeddings {
            slot,
            actions,
            shared_pre,
            traces,
        })
    }

    /// `own` holds this side's embeddings, `other` the other side's.
    fn head_cache(&self, side: Side, own: &Embeddings, other: &Embeddings) -> Result<HeadCache, MarlError> {
        let half = &self.halves[side.index()];
        let e = self.embed_dim;
        let own_part = (0..own.actions.len())
            .map(|s| half.head.first_partial_dense(own.output(s), 0))
            .collect::<Result<Vec<_>, _>>()?;
        let (mut value_pre, mut value_post, mut mixed) = (Vec::new(), Vec::new(), Vec::new());
        for s in 0..other.actions.len() {
            match self.coupling {
                Coupling::Attention => {
                    let (pre, post) = half.attention.value(other.output(s))?;
                    mixed.push(half.head.first_partial_dense(&post, e)?);
                    value_pre.push(pre);
                    value_post.push(post);
                }
                Coupling::Independent => mixed.push(vec![0.0; e]),
            }
        }
        Ok(HeadCache {
            own: own_part,
            mixed,
            value_pre,
            value_post,
        })
    }

    fn forward(&self, batch: &CriticBatch, inputs: &JointInputs) -> Result<Forward, MarlError> {
        let mut drugs: Vec<usize> = batch.entries.iter().map(|e| e.0).collect();
        let mut proteins: Vec<usize> = batch.entries.iter().map(|e| e.1).collect();
        for v in [&mut drugs, &mut proteins] {
            v.sort_unstable();
            v.dedup();
        }
        let ed = self.embeddings(Side::Drug, drugs, inputs)?;
        let ep = self.embeddings(Side::Protein, proteins, inputs)?;
        let hd = self.head_cache(Side::Drug, &ed, &ep)?;
        let hp = self.head_cache(Side::Protein, &ep, &ed)?;
        Ok(Forward {
            emb: [ed, ep],
            heads: [hd, hp],
        })
    }

    /// Upper-layer trace of `f_side` for the pair in slots `(own, other)`.
    fn head_trace(&self, fw: &Forward, side: Side, own: usize, other: usize) -> Result<MlpTrace, MarlError> {
        let head = &self.halves[side.index()].head;
        let cache = &fw.heads[side.index()];
        let pre0: Vec<f64> = cache.own[own]
            .iter()
            .zip(&cache.mixed[other])
            .zip(head.first_bias())
            .map(|((a, b), c)| a + b + c)
            .collect();
        Ok(head.trace_pre(pre0)?)
    }

    /// `[Q_drug, Q_protein]` for one joint action.
    pub fn q_pair(&self, inputs: &JointInputs, drug: usize, protein: usize) -> Result<[f64; 2], MarlError> {
        let batch = CriticBatch {
            entries: vec![(drug, protein, 0.0, 1)],
        };
        let fw = self.forward(&batch, inputs)?;
        let qd = self.head_trace(&fw, Side::Drug, 0, 0)?.output()[0];
        let qp = self.head_trace(&fw, Side::Protein, 0, 0)?.output()[0];
        Ok([qd, qp])
    }

    /// Loss and exact gradients of both critics over `batch`.
    pub fn loss_and_grad(&self, batch: &CriticBatch, inputs: &JointInputs) -> Result<(f64, CriticGrads), MarlError> {
        let mut grads = self.zero_grads();
        if batch.entries.is_empty() {
            return Ok((0.0, grads));
        }
        let fw = self.forward(batch, inputs)?;
        let total = batch.total() as f64;
        let e = self.embed_dim;
        let n = [fw.emb[0].actions.len(), fw.emb[1].actions.len()];
        // first-layer deltas of f_side summed per own slot and per other slot
        let mut d_own: [Vec<Vec<f64>>; 2] = [vec![vec![0.0; e]; n[0]], vec![vec![0.0; e]; n[1]]];
        let mut d_mixed: [Vec<Vec<f64>>; 2] = [vec![vec![0.0; e]; n[1]], vec![vec![0.0; e]; n[0]]];
        let mut loss = 0.0;
        for &(i, j, target, count) in &batch.entries {
            let si = fw.emb[0].slot[&i];
            let sj = fw.emb[1].slot[&j];
            for (side, own, other) in [(Side::Drug, si, sj), (Side::Protein, sj, si)] {
                let k = side.index();
                let trace = self.head_trace(&fw, side, own, other)?;
                let r = trace.output()[0] - target;
                loss += count as f64 * r * r;
                let upstream = [2.0 * count as f64 * r / total];
                let delta0 =
                    self.halves[k]
                        .head
                        .backward_core(&trace, &upstream, &mut grads.blocks[3 * k + 1])?;
                for (acc, v) in d_own[k][own].iter_mut().zip(&delta0) {
                    *acc += v;
                }
                for (acc, v) in d_mixed[k][other].iter_mut().zip(&delta0) {
                    *acc += v;
                }
            }
        }

        let mut d_embed: [Vec<Vec<f64>>; 2] = [vec![vec![0.0; e]; n[0]], vec![vec![0.0; e]; n[1]]];
        for side in [Side::Drug, Side::Protein] {
            let k = side.index();
            let o = side.other().index();
            let half = &self.halves[k];
            let (head_grad, attn_grad) = {
                let [_, fd, ad, _, fp, ap] = &mut grads.blocks;
                if k == 0 {
                    (fd, ad)
                } else {
                    (fp, ap)
                }
            };
            for s in 0..n[k] {
                half.head
                    .accumulate_first_dense(fw.emb[k].output(s), 0, &d_own[k][s], head_grad)?;
                let g = half.head.first_input_grad(&d_own[k][s], 0, e);
                for (acc, v) in d_embed[k][s].iter_mut().zip(&g) {
                    *acc += v;
                }
            }
            if self.coupling == Coupling::Attention {
                let cache = &fw.heads[k];
                for s in 0..n[o] {
                    half.head
                        .accumulate_first_dense(&cache.value_post[s], e, &d_mixed[k][s], head_grad)?;
                    let dx = half.head.first_input_grad(&d_mixed[k][s], e, e);
                    let dg = half.attention.value_backward(
                        fw.emb[o].output(s),
                        &cache.value_pre[s],
                        &dx,
                        1.0,
                        attn_grad,
                    )?;
                    for (acc, v) in d_embed[o][s].iter_mut().zip(&dg) {
                        *acc += v;
                    }
                }
            }
        }

        for side in [Side::Drug, Side::Protein] {
            let k = side.index();
            let agent = match side {
                Side::Drug => &inputs.drug,
                Side::Protein => &inputs.protein,
            };
            let net = &self.halves[k].embed;
            let emb = &fw.emb[k];
            let grad = &mut grads.blocks[3 * k];
            let mut shared_delta = vec![0.0; net.sizes()[1]];
            for (s, &a) in emb.actions.iter().enumerate() {
                let delta0 = net.backward(&agent.critic_candidates[a], &emb.traces[s], &d_embed[k][s], grad)?;
                for (acc, v) in shared_delta.iter_mut().zip(&delta0) {
                    *acc += v;
                }
            }
            net.accumulate_first(&agent.critic_shared, &shared_delta, grad)?;
            debug_assert_eq!(emb.shared_pre.len(), shared_delta.len());
        }
        if self.freeze_value || self.coupling == Coupling::Independent {
            for k in 0..2 {
                let r = self.halves[k].attention.value_range();
                grads.blocks[3 * k + 2][r].fill(0.0);
            }
        }
        Ok((loss / total, grads))
    }

    /// One optimizer step per block.
    pub fn apply(&mut self, grads: &CriticGrads, optimizers: &mut [Optimizer]) -> Result<(), MarlError> {
        for ((params, grad), opt) in self.blocks_mut().into_iter().zip(&grads.blocks).zip(optimizers) {
            opt.step(params, grad)?;
        }
        Ok(())
    }
}
