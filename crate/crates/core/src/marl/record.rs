//! Output records and their consistency checks.

use super::{MarlError, Method, PairContext, Visit};
use crate::actionspace::DrugEdit;
use crate::oracle::AffinityOracle;
use crate::protein::ProteinSeq;
use crate::reward::{AffinityQuad, RewardBreakdown, RewardWeights, SignScope};
use crate::smiles::parse_smiles;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Re-querying the oracle on re-parsed SMILES may visit atoms in another
/// order, so fingerprint sums can differ in the last bits.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub position: usize,
    pub from: char,
    pub to: char,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("record field {field}: stored {stored}, recomputed {recomputed}")]
pub struct AuditError {
    pub field: &'static str,
    pub stored: f64,
    pub recomputed: f64,
}

/// One generated counterfactual pair with every quantity its reward was
/// built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualRecord {
    pub method: Method,
    pub drug_id: String,
    pub protein_id: String,
    pub drug: String,
    pub drug_counterfactual: String,
    pub protein: ProteinSeq,
    pub protein_counterfactual: ProteinSeq,
    pub drug_edit: Option<DrugEdit>,
    pub mutation: Option<Mutation>,
    pub affinities: AffinityQuad,
    pub breakdown: RewardBreakdown,
    pub weights: RewardWeights,
    pub sign_scope: SignScope,
    /// Number of episodes that sampled this pair (0 for list baselines).
    pub visits: u64,
}

fn compare(field: &'static str, stored: f64, recomputed: f64, tolerance: f64) -> Result<(), AuditError> {
    if stored.to_bits() == recomputed.to_bits() || (stored - recomputed).abs() <= tolerance {
        Ok(())
    } else {
        Err(AuditError {
            field,
            stored,
            recomputed,
        })
    }
}

impl CounterfactualRecord {
    /// Recomputes the reward decomposition from the stored affinities,
    /// similarities and weights; every value must match bit for bit.
    pub fn audit(&self) -> Result<(), AuditError> {
        let again = RewardBreakdown::compose(
            &self.affinities,
            self.breakdown.sim_drug,
            self.breakdown.sim_protein,
            &self.weights,
            self.sign_scope,
        );
        let b = &self.breakdown;
        compare("delta_total", b.delta_total, again.delta_total, 0.0)?;
        compare("delta_joint", b.delta_joint, again.delta_joint, 0.0)?;
        compare("delta_sjoint", b.delta_sjoint, again.delta_sjoint, 0.0)?;
        compare("reward", b.reward, again.reward, 0.0)?;
        if let Some(m) = self.mutation {
            let ok = self.protein.residue(m.position) == Some(m.from)
                && self.protein_counterfactual.residue(m.position) == Some(m.to)
                && self.protein.hamming(&self.protein_counterfactual) == 1;
            if !ok {
                return Err(AuditError {
                    field: "mutation",
                    stored: m.position as f64,
                    recomputed: f64::NAN,
                });
            }
        }
        Ok(())
    }

    /// Re-queries the oracle on the stored sequences and SMILES and checks
    /// the four affinities and both similarities.
    pub fn verify(&self, oracle: &dyn AffinityOracle) -> Result<(), MarlError> {
        let parse = |s: &str| parse_smiles(s).map_err(|e| MarlError::Smiles(e.to_string()));
        let d = parse(&self.drug)?;
        let d2 = parse(&self.drug_counterfactual)?;
        let quad = AffinityQuad::query(oracle, &d, &self.protein, &d2, &self.protein_counterfactual)?;
        let sims = crate::reward::similarities(oracle, &d, &self.protein, &d2, &self.protein_counterfactual)?;
        let a = &self.affinities;
        let check = |field, s, r| compare(field, s, r, VERIFY_TOLERANCE);
        check("reference", a.reference, quad.reference)?;
        check("drug_only", a.drug_only, quad.drug_only)?;
        check("protein_only", a.protein_only, quad.protein_only)?;
        check("joint", a.joint, quad.joint)?;
        check("sim_drug", self.breakdown.sim_drug, sims.0)?;
        check("sim_protein", self.breakdown.sim_protein, sims.1)?;
        Ok(self.audit()?)
    }
}

/// Turns visited joint actions into the top-k records by reward. Ties are
/// broken by drug action index, then protein action index.
pub fn harvest(
    ctx: &mut PairContext<'_>,
    method: Method,
    visits: &BTreeMap<(usize, usize), Visit>,
    top_k: usize,
) -> Result<Vec<CounterfactualRecord>, MarlError> {
    let mut ranked: Vec<(&(usize, usize), &Visit)> = visits.iter().collect();
    ranked.sort_by(|a, b| b.1.breakdown.reward.total_cmp(&a.1.breakdown.reward).then(a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(top_k)
        .map(|(&(i, j), v)| ctx.record(method, i, j, v.count))
        .collect()
}
