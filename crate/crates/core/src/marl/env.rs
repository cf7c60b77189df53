//! One-step environment around a reference (drug, protein) pair.

use super::{MarlError, ObservationSpec, Side};
use crate::actionspace::{apply_drug_edit, JointAction};
use crate::molgraph::{canonical_certificate, Fingerprint, MolGraph};
use crate::oracle::{cosine_similarity, AffinityOracle};
use crate::protein::{encode_protein, mutate_to_alanine, EncodedProtein, ProteinSeq};
use crate::reward::{AffinityQuad, RewardBreakdown, RewardWeights, SignScope};

#[derive(Debug, Clone)]
pub struct EnvState {
    pub drug_obs: Fingerprint,
    pub protein_obs: EncodedProtein,
    pub reference: (MolGraph, ProteinSeq),
    pub current: (MolGraph, ProteinSeq),
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: EnvState,
    pub affinities: AffinityQuad,
    pub breakdown: RewardBreakdown,
}

pub struct Environment<'a> {
    oracle: &'a dyn AffinityOracle,
    drug: MolGraph,
    protein: ProteinSeq,
    weights: RewardWeights,
    scope: SignScope,
    observation: ObservationSpec,
    reference_affinity: f64,
    drug_encoding: Vec<f64>,
    protein_encoding: Vec<f64>,
}

impl<'a> Environment<'a> {
    /// Queries the reference affinity once; every step reuses it.
    pub fn new(
        oracle: &'a dyn AffinityOracle,
        drug: MolGraph,
        protein: ProteinSeq,
        weights: RewardWeights,
        scope: SignScope,
        observation: ObservationSpec,
    ) -> Result<Self, MarlError> {
        weights.validate()?;
        let reference_affinity = oracle.predict(&drug, &protein)?;
        Ok(Environment {
            drug_encoding: oracle.encode_drug(&drug),
            protein_encoding: oracle.encode_protein(&protein),
            oracle,
            drug,
            protein,
            weights,
            scope,
            observation,
            reference_affinity,
        })
    }

    pub fn reference_affinity(&self) -> f64 {
        self.reference_affinity
    }

    pub fn reset(&self) -> Result<EnvState, MarlError> {
        self.observe(self.drug.clone(), self.protein.clone(), false)
    }

    fn observe(&self, drug: MolGraph, protein: ProteinSeq, terminal: bool) -> Result<EnvState, MarlError> {
        Ok(EnvState {
            drug_obs: self.observation.fingerprint(&drug)?,
            protein_obs: encode_protein(&protein),
            reference: (self.drug.clone(), self.protein.clone()),
            current: (drug, protein),
            terminal,
        })
    }

    /// Similarity of `drug` to the reference drug under the oracle's encoder.
    pub fn drug_similarity(&self, drug: &MolGraph) -> Result<f64, MarlError> {
        Ok(cosine_similarity(&self.drug_encoding, &self.oracle.encode_drug(drug))?)
    }

    pub fn protein_similarity(&self, protein: &ProteinSeq) -> Result<f64, MarlError> {
        Ok(cosine_similarity(
            &self.protein_encoding,
            &self.oracle.encode_protein(protein),
        )?)
    }

    pub fn step(&self, state: &EnvState, joint: &JointAction) -> Result<StepOutcome, MarlError> {
        if state.terminal {
            return Err(MarlError::Terminal);
        }
        let (cur_drug, cur_protein) = &state.current;
        let drug = match joint.drug() {
            Some(action) => {
                
                apply_drug_edit(cur_drug, &action.edit)
                    .filter(|g| canonical_certificate(g) == action.certificate)
                    .ok_or(MarlError::InvalidAction(Side::Drug))?
            }
            None => cur_drug.clone(),
        };
        let protein = match joint.protein() {
            Some(action) => match mutate_to_alanine(cur_protein, action.position) {
                Ok(p) if p == action.result => p,
                _ => return Err(MarlError::InvalidAction(Side::Protein)),
            },
            None => cur_protein.clone(),
        };
        let affinities = AffinityQuad {
            reference: self.reference_affinity,
            drug_only: self.oracle.predict(&drug, &self.protein)?,
            protein_only: self.oracle.predict(&self.drug, &protein)?,
            joint: self.oracle.predict(&drug, &protein)?,
        };
        let breakdown = RewardBreakdown::compose(
            &affinities,
            self.drug_similarity(&drug)?,
            self.protein_similarity(&protein)?,
            &self.weights,
            self.scope,
        );
        Ok(StepOutcome {
            state: self.observe(drug, protein, true)?,
            affinities,
            breakdown,
        })
    }
}

pub fn env_step(env: &Environment<'_>, state: &EnvState, joint: &JointAction) -> Result<StepOutcome, MarlError> {
    env.step(state, joint)
}
