//! The actor-critic loop shared by the attention-coupled trainer and its
//! independent-critic ablation.

use super::{
    harvest, CounterfactualRecord, Coupling, CriticBatch, JointInputs, MaacCritic, MarlError, Method,
    Mutation, PolicyNet, ReplayBuffer, Side, TrainConfig, Transition,
};
use crate::actionspace::{enumerate_drug_actions, enumerate_protein_actions, DrugAction, ProteinAction};
use crate::molgraph::MolGraph;
use crate::neural::Optimizer;
use crate::oracle::{cosine_similarity, AffinityOracle, OracleError};
use crate::protein::ProteinSeq;
use crate::reward::{AffinityQuad, RewardBreakdown};
use crate::smiles::write_smiles;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// Temporal-difference residual `r + γ·Q(s', a') − Q(s, a)`; a terminal
/// transition (`next = None`) drops the successor term.
pub fn q_loss(q: f64, reward: f64, next: Option<f64>, gamma: f64) -> f64 {
    reward + next.map_or(0.0, |qn| gamma * qn) - q
}

/// Reward lookup by action indices.
pub trait RewardSource {
    fn reward(&mut self, drug: usize, protein: usize) -> Result<RewardBreakdown, MarlError>;
}

#[derive(Debug, Clone)]
pub struct PairInstance {
    pub drug_id: String,
    pub protein_id: String,
    pub drug: MolGraph,
    pub protein: ProteinSeq,
}

/// A reference pair with both action spaces enumerated and every marginal
/// prediction cached. Joint predictions are cached as they are requested.
pub struct PairContext<'a> {
    pub pair: &'a PairInstance,
    pub config: TrainConfig,
    oracle: &'a dyn AffinityOracle,
    pub drug_actions: Vec<DrugAction>,
    pub protein_actions: Vec<ProteinAction>,
    pub reference: f64,
    pub drug_only: Vec<f64>,
    pub protein_only: Vec<f64>,
    pub sim_drug: Vec<f64>,
    pub sim_protein: Vec<f64>,
    joint: HashMap<(usize, usize), f64>,
}

impl<'a> PairContext<'a> {
    pub fn new(pair: &'a PairInstance, oracle: &'a dyn AffinityOracle, config: &TrainConfig) -> Result<Self, MarlError> {
        config.validate()?;
        let drug_actions = enumerate_drug_actions(&pair.drug, &config.admissible);
        if drug_actions.is_empty() {
            return Err(MarlError::EmptyActionSpace(Side::Drug));
        }
        let protein_actions = enumerate_protein_actions(&pair.protein);
        if protein_actions.is_empty() {
            return Err(MarlError::EmptyActionSpace(Side::Protein));
        }
        let reference = oracle.predict(&pair.drug, &pair.protein)?;
        let drug_ref = oracle.encode_drug(&pair.drug);
        let protein_ref = oracle.encode_protein(&pair.protein);
        let drug_scores = drug_actions
            .par_iter()
            .map(|a| {
                Ok((
                    oracle.predict(&a.result, &pair.protein)?,
                    cosine_similarity(&drug_ref, &oracle.encode_drug(&a.result))?,
                ))
            })
            .collect::<Result<Vec<(f64, f64)>, OracleError>>()?;
        let protein_scores = protein_actions
            .par_iter()
            .map(|a| {
                Ok((
                    oracle.predict(&pair.drug, &a.result)?,
                    cosine_similarity(&protein_ref, &oracle.encode_protein(&a.result))?,
                ))
            })
            .collect::<Result<Vec<(f64, f64)>, OracleError>>()?;
        let (drug_only, sim_drug) = drug_scores.into_iter().unzip();
        let (protein_only, sim_protein) = protein_scores.into_iter().unzip();
        Ok(PairContext {
            pair,
            config: config.clone(),
            oracle,
            drug_actions,
            protein_actions,
            reference,
            drug_only,
            protein_only,
            sim_drug,
            sim_protein,
            joint: HashMap::new(),
        })
    }

    pub fn inputs(&self) -> Result<JointInputs, MarlError> {
        JointInputs::observe(
            &self.config.observation(),
            &self.pair.drug,
            &self.pair.protein,
            &self.drug_actions,
            &self.protein_actions,
        )
    }

    fn check(&self, drug: usize, protein: usize) -> Result<(), MarlError> {
        if drug >= self.drug_actions.len() {
            return Err(MarlError::ActionIndex {
                index: drug,
                count: self.drug_actions.len(),
            });
        }
        if protein >= self.protein_actions.len() {
            return Err(MarlError::ActionIndex {
                index: protein,
                count: self.protein_actions.len(),
            });
        }
        Ok(())
    }

    pub fn affinities(&mut self, drug: usize, protein: usize) -> Result<AffinityQuad, MarlError> {
        self.check(drug, protein)?;
        let joint = match self.joint.get(&(drug, protein)) {
            Some(&v) => v,
            None => {
                let v = self.oracle.predict(
                    &self.drug_actions[drug].result,
                    &self.protein_actions[protein].result,
                )?;
                self.joint.insert((drug, protein), v);
                v
            }
        };
        Ok(AffinityQuad {
            reference: self.reference,
            drug_only: self.drug_only[drug],
            protein_only: self.protein_only[protein],
            joint,
        })
    }

    pub fn breakdown(&mut self, drug: usize, protein: usize) -> Result<RewardBreakdown, MarlError> {
        let quad = self.affinities(drug, protein)?;
        Ok(RewardBreakdown::compose(
            &quad,
            self.sim_drug[drug],
            self.sim_protein[protein],
            &self.config.weights,
            self.config.sign_scope,
        ))
    }

    pub fn record(&mut self, method: Method, drug: usize, protein: usize, visits: u64) -> Result<CounterfactualRecord, MarlError> {
        let affinities = self.affinities(drug, protein)?;
        let breakdown = self.breakdown(drug, protein)?;
        let da = &self.drug_actions[drug];
        let pa = &self.protein_actions[protein];
        Ok(CounterfactualRecord {
            method,
            drug_id: self.pair.drug_id.clone(),
            protein_id: self.pair.protein_id.clone(),
            drug: write_smiles(&self.pair.drug),
            drug_counterfactual: write_smiles(&da.result),
            protein: self.pair.protein.clone(),
            protein_counterfactual: pa.result.clone(),
            drug_edit: Some(da.edit),
            mutation: Some(Mutation {
                position: pa.position,
                from: pa.original,
                to: 'A',
            }),
            affinities,
            breakdown,
            weights: self.config.weights,
            sign_scope: self.config.sign_scope,
            visits,
        })
    }
}

impl RewardSource for PairContext<'_> {
    fn reward(&mut self, drug: usize, protein: usize) -> Result<RewardBreakdown, MarlError> {
        self.breakdown(drug, protein)
    }
}

/// Statistics of one sampled joint action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub breakdown: RewardBreakdown,
    pub count: u64,
    pub first_episode: usize,
}

/// Two actors and their critics.
pub struct Learner {
    config: TrainConfig,
    rng: ChaCha8Rng,
    policies: [PolicyNet; 2],
    policy_opts: [Optimizer; 2],
    critic: MaacCritic,
    critic_opts: Vec<Optimizer>,
    buffer: ReplayBuffer,
    episodes: usize,
}

impl Learner {
    /// Networks are drawn from the seeded stream in the order drug policy,
    /// protein policy, critic.
    pub fn new(inputs: &JointInputs, config: &TrainConfig, coupling: Coupling) -> Result<Self, MarlError> {
        config.validate()?;
        if inputs.drug.is_empty() {
            return Err(MarlError::EmptyActionSpace(Side::Drug));
        }
        if inputs.protein.is_empty() {
            return Err(MarlError::EmptyActionSpace(Side::Protein));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let pd = PolicyNet::new(inputs.drug.policy_dim(), &config.hidden, config.temperature, &mut rng)?;
        let pp = PolicyNet::new(inputs.protein.policy_dim(), &config.hidden, config.temperature, &mut rng)?;
        let critic = MaacCritic::new(
            inputs.drug.critic_dim(),
            inputs.protein.critic_dim(),
            &config.hidden,
            coupling,
            config.freeze_attention_value,
            &mut rng,
        )?;
        let policy_opts = [
            Optimizer::new(config.optimizer, config.policy_lr, pd.net().param_count())?,
            Optimizer::new(config.optimizer, config.policy_lr, pp.net().param_count())?,
        ];
        let critic_opts = critic.optimizers(config.optimizer, config.critic_lr)?;
        Ok(Learner {
            config: config.clone(),
            rng,
            policies: [pd, pp],
            policy_opts,
            critic,
            critic_opts,
            buffer: ReplayBuffer::new(),
            episodes: 0,
        })
    }

    pub fn policy(&self, side: Side) -> &PolicyNet {
        &self.policies[side.index()]
    }

    pub fn critic(&self) -> &MaacCritic {
        &self.critic
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// Every parameter except the attention value transforms, which the
    /// independent critics never use.
    pub fn snapshot(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.policies.iter().flat_map(|p| p.net().params().to_vec()).collect();
        for (b, block) in self.critic.blocks().iter().enumerate() {
            if b % 3 == 2 {
                let side = if b < 3 { Side::Drug } else { Side::Protein };
                let v = self.critic.attention(side).value_range();
                out.extend_from_slice(&block[..v.start]);
            } else {
                out.extend_from_slice(block);
            }
        }
        out
    }

    /// One episode: sample a joint action, observe its reward, fit both
    /// critics on a replay minibatch, then move both policies along their
    /// own critic's value of the sampled action.
    pub fn step(&mut self, inputs: &JointInputs, source: &mut dyn RewardSource) -> Result<(usize, usize, RewardBreakdown), MarlError> {
        let eval_d = self.policies[0].evaluate(&inputs.drug)?;
        let eval_p = self.policies[1].evaluate(&inputs.protein)?;
        let i = WeightedIndex::new(&eval_d.probs)
            .map_err(|e| MarlError::Config(e.to_string()))?
            .sample(&mut self.rng);
        let j = WeightedIndex::new(&eval_p.probs)
            .map_err(|e| MarlError::Config(e.to_string()))?
            .sample(&mut self.rng);
        let breakdown = source.reward(i, j)?;
        self.buffer.push(Transition {
            drug: i,
            protein: j,
            reward: breakdown.reward,
        });

        let sample = self.buffer.sample(self.config.batch_size, &mut self.rng);
        // one-step episodes: every successor is terminal, so the target is r
        let batch = CriticBatch::group(
            sample
                .iter()
                .map(|t| (t.drug, t.protein, q_loss(0.0, t.reward, None, self.config.gamma))),
        );
        let (_, grads) = self.critic.loss_and_grad(&batch, inputs)?;
        self.critic.apply(&grads, &mut self.critic_opts)?;

        let [qd, qp] = self.critic.q_pair(inputs, i, j)?;
        let gd = self.policies[0].surrogate_grad(&inputs.drug, &eval_d, i, qd)?;
        let gp = self.policies[1].surrogate_grad(&inputs.protein, &eval_p, j, qp)?;
        self.policy_opts[0].step(self.policies[0].net_mut().params_mut(), &gd)?;
        self.policy_opts[1].step(self.policies[1].net_mut().params_mut(), &gp)?;
        self.episodes += 1;
        Ok((i, j, breakdown))
    }

    /// Runs `episodes` episodes and returns every visited joint action.
    pub fn run(
        &mut self,
        inputs: &JointInputs,
        source: &mut dyn RewardSource,
        episodes: usize,
    ) -> Result<BTreeMap<(usize, usize), Visit>, MarlError> {
        let mut visits: BTreeMap<(usize, usize), Visit> = BTreeMap::new();
        for _ in 0..episodes {
            let episode = self.episodes;
            let (i, j, breakdown) = self.step(inputs, source)?;
            visits
                .entry((i, j))
                .and_modify(|v| v.count += 1)
                .or_insert(Visit {
                    breakdown,
                    count: 1,
                    first_episode: episode,
                });
            if (episode + 1).is_multiple_of(500) {
                log::debug!("episode {}: {} distinct pairs visited", episode + 1, visits.len());
            }
        }
        Ok(visits)
    }
}

fn train(
    pair: &PairInstance,
    oracle: &dyn AffinityOracle,
    config: &TrainConfig,
    coupling: Coupling,
    method: Method,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    let mut ctx = PairContext::new(pair, oracle, config)?;
    if config.episodes == 0 {
        return Ok(Vec::new());
    }
    let inputs = ctx.inputs()?;
    let mut learner = Learner::new(&inputs, config, coupling)?;
    let visits = learner.run(&inputs, &mut ctx, config.episodes)?;
    harvest(&mut ctx, method, &visits, config.top_k)
}

/// Attention-coupled two-agent training on one reference pair.
pub fn train_macda(
    pair: &PairInstance,
    oracle: &dyn AffinityOracle,
    config: &TrainConfig,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    train(pair, oracle, config, Coupling::Attention, Method::Macda)
}

/// Two agents sharing the reward, each critic blind to the other agent.
pub fn train_mameg(
    pair: &PairInstance,
    oracle: &dyn AffinityOracle,
    config: &TrainConfig,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    train(pair, oracle, config, Coupling::Independent, Method::Mameg)
}
