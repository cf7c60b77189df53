//! Network inputs for one reference pair and its enumerated actions.
//!
//! A candidate action is represented by how it changes the observation:
//! `obs(post-action) − obs(reference)`. The policy sees
//! `[drug obs | protein obs | own delta]`, each critic embedding sees
//! `[own obs | own delta]`.

use super::MarlError;
use crate::actionspace::{DrugAction, ProteinAction};
use crate::molgraph::{compute_fingerprint, Fingerprint, MolGraph};
use crate::neural::SparseVec;
use crate::protein::{encode_protein, EncodedProtein, ProteinSeq, ENCODED_LENGTH};

/// Residue codes are divided by this before entering a network.
const CODE_SCALE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationSpec {
    pub fp_bits: usize,
    pub fp_radius: usize,
}

impl ObservationSpec {
    pub fn fingerprint(&self, g: &MolGraph) -> Result<Fingerprint, MarlError> {
        compute_fingerprint(g, self.fp_radius, self.fp_bits)
            .map_err(|e| MarlError::Config(e.to_string()))
    }

    pub fn drug_vector(&self, fp: &Fingerprint) -> SparseVec {
        SparseVec::from_entries(fp.nbits(), fp.ones().map(|b| (b, 1.0)).collect())
            .expect("bits are in range")
    }

    pub fn protein_vector(&self, enc: &EncodedProtein) -> SparseVec {
        SparseVec::from_dense(
            &enc.codes()
                .iter()
                .map(|&c| c as f64 / CODE_SCALE)
                .collect::<Vec<_>>(),
        )
    }

    pub fn drug_delta(&self, reference: &Fingerprint, after: &Fingerprint) -> SparseVec {
        let mut entries: Vec<(usize, f64)> = after
            .ones()
            .filter(|&b| !reference.get(b))
            .map(|b| (b, 1.0))
            .collect();
        entries.extend(reference.ones().filter(|&b| !after.get(b)).map(|b| (b, -1.0)));
        SparseVec::from_entries(self.fp_bits, entries).expect("bits are in range")
    }

    pub fn protein_delta(&self, reference: &EncodedProtein, after: &ProteinSeq) -> SparseVec {
        let after = encode_protein(after);
        let entries = reference
            .codes()
            .iter()
            .zip(after.codes())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (&a, &b))| (i, (b as f64 - a as f64) / CODE_SCALE))
            .collect();
        SparseVec::from_entries(ENCODED_LENGTH, entries).expect("positions are in range")
    }
}

/// Inputs of one agent: a state part shared by every candidate and one
/// sparse block per candidate, already placed at the right offset.
#[derive(Debug, Clone)]
pub struct AgentInputs {
    pub policy_shared: SparseVec,
    pub policy_candidates: Vec<SparseVec>,
    pub critic_shared: SparseVec,
    pub critic_candidates: Vec<SparseVec>,
}

impl AgentInputs {
    /// Lays out `[policy_state | delta]` and `[critic_state | delta]`.
    pub fn new(policy_state: &SparseVec, critic_state: &SparseVec, deltas: &[SparseVec]) -> Result<Self, MarlError> {
        let delta_dim = deltas.first().map_or(0, SparseVec::dim);
        if deltas.iter().any(|d| d.dim() != delta_dim) {
            return Err(MarlError::Config("candidate deltas differ in width".into()));
        }
        let policy_dim = policy_state.dim() + delta_dim;
        let critic_dim = critic_state.dim() + delta_dim;
        let place = |d: &SparseVec, offset: usize, dim: usize| d.shifted(offset, dim);
        Ok(AgentInputs {
            policy_shared: SparseVec::concat(&[policy_state, &SparseVec::zeros(delta_dim)]),
            policy_candidates: deltas
                .iter()
                .map(|d| place(d, policy_state.dim(), policy_dim))
                .collect::<Result<_, _>>()?,
            critic_shared: SparseVec::concat(&[critic_state, &SparseVec::zeros(delta_dim)]),
            critic_candidates: deltas
                .iter()
                .map(|d| place(d, critic_state.dim(), critic_dim))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn len(&self) -> usize {
        self.policy_candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policy_candidates.is_empty()
    }

    pub fn policy_dim(&self) -> usize {
        self.policy_shared.dim()
    }

    pub fn critic_dim(&self) -> usize {
        self.critic_shared.dim()
    }

    /// Dense policy input of candidate `k`.
    pub fn policy_input(&self, k: usize) -> Vec<f64> {
        add_dense(&self.policy_shared, &self.policy_candidates[k])
    }

    /// Dense critic-embedding input of candidate `k`.
    pub fn critic_input(&self, k: usize) -> Vec<f64> {
        add_dense(&self.critic_shared, &self.critic_candidates[k])
    }
}

fn add_dense(a: &SparseVec, b: &SparseVec) -> Vec<f64> {
    let mut x = a.to_dense();
    for &(i, v) in b.entries() {
        x[i] += v;
    }
    x
}

#[derive(Debug, Clone)]
pub struct JointInputs {
    pub drug: AgentInputs,
    pub protein: AgentInputs,
}

impl JointInputs {
    pub fn observe(
        spec: &ObservationSpec,
        drug: &MolGraph,
        protein: &ProteinSeq,
        drug_actions: &[DrugAction],
        protein_actions: &[ProteinAction],
    ) -> Result<Self, MarlError> {
        let fp = spec.fingerprint(drug)?;
        let enc = encode_protein(protein);
        let drug_obs = spec.drug_vector(&fp);
        let protein_obs = spec.protein_vector(&enc);
        let state = SparseVec::concat(&[&drug_obs, &protein_obs]);
        let drug_deltas = drug_actions
            .iter()
            .map(|a| Ok(spec.drug_delta(&fp, &spec.fingerprint(&a.result)?)))
            .collect::<Result<Vec<_>, MarlError>>()?;
        let protein_deltas: Vec<SparseVec> = protein_actions
            .iter()
            .map(|a| spec.protein_delta(&enc, &a.result))
            .collect();
        Ok(JointInputs {
            drug: AgentInputs::new(&state, &drug_obs, &drug_deltas)?,
            protein: AgentInputs::new(&state, &protein_obs, &protein_deltas)?,
        })
    }
}
