//! Counterfactual reward: affinity change, joint isolation, sign correction
//! and the weighted combination with similarity terms.
//!
//! With `ΔF(d', p') = |F(d', p') − F(d, p)|`,
//!
//! ```text
//! Δ_joint  = ΔF(d', p') − ΔF(d', p) − ΔF(d, p')
//! Δ_sjoint = −sign(F(d', p') − F(d, p)) · ΔF(d', p') − ΔF(d', p) − ΔF(d, p')
//! R        = α_r · Δ_sjoint + α_p · sim(p, p') + α_d · sim(d, d')
//! ```

use crate::molgraph::MolGraph;
use crate::oracle::{cosine_similarity, AffinityOracle, OracleError};
use crate::protein::ProteinSeq;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("reward weight {name} = {value} must be finite and non-negative")]
    Weight { name: &'static str, value: f64 },
}

fn default_alpha_r() -> f64 {
    1.0
}
fn default_alpha_d() -> f64 {
    0.05
}
fn default_alpha_p() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    #[serde(default = "default_alpha_r")]
    pub alpha_r: f64,
    #[serde(default = "default_alpha_d")]
    pub alpha_d: f64,
    #[serde(default = "default_alpha_p")]
    pub alpha_p: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            alpha_r: default_alpha_r(),
            alpha_d: default_alpha_d(),
            alpha_p: default_alpha_p(),
        }
    }
}

impl RewardWeights {
    pub fn zero() -> Self {
        RewardWeights {
            alpha_r: 0.0,
            alpha_d: 0.0,
            alpha_p: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        for (name, value) in [
            ("alpha_r", self.alpha_r),
            ("alpha_d", self.alpha_d),
            ("alpha_p", self.alpha_p),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(RewardError::Weight { name, value });
            }
        }
        Ok(())
    }
}

/// Which terms of `Δ_sjoint` the sign factor multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignScope {
    /// Only the joint change `ΔF(d', p')`.
    #[default]
    LeadingTerm,
    /// The whole bracket `ΔF(d', p') − ΔF(d', p) − ΔF(d, p')`.
    AllTerms,
}

/// `sign` with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The four predictions a joint counterfactual needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityQuad {
    /// `F(d, p)`
    pub reference: f64,
    /// `F(d', p)`
    pub drug_only: f64,
    /// `F(d, p')`
    pub protein_only: f64,
    /// `F(d', p')`
    pub joint: f64,
}

impl AffinityQuad {
    pub fn query(
        oracle: &dyn AffinityOracle,
        d: &MolGraph,
        p: &ProteinSeq,
        d2: &MolGraph,
        p2: &ProteinSeq,
    ) -> Result<Self, OracleError> {
        Ok(AffinityQuad {
            reference: oracle.predict(d, p)?,
            drug_only: oracle.predict(d2, p)?,
            protein_only: oracle.predict(d, p2)?,
            joint: oracle.predict(d2, p2)?,
        })
    }

    pub fn delta_total(&self) -> f64 {
        (self.joint - self.reference).abs()
    }

    pub fn delta_joint(&self) -> f64 {
        self.delta_total()
            - (self.drug_only - self.reference).abs()
            - (self.protein_only - self.reference).abs()
    }

    pub fn delta_sjoint(&self, scope: SignScope) -> f64 {
        let s = -sign(self.joint - self.reference);
        let drug = (self.drug_only - self.reference).abs();
        let protein = (self.protein_only - self.reference).abs();
        match scope {
            SignScope::LeadingTerm => s * self.delta_total() - drug - protein,
            SignScope::AllTerms => s * (self.delta_total() - drug - protein),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub delta_total: f64,
    pub delta_joint: f64,
    pub delta_sjoint: f64,
    pub sim_drug: f64,
    pub sim_protein: f64,
    pub reward: f64,
}

impl RewardBreakdown {
    /// Assembles a breakdown from the four predictions and the two similarities.
    pub fn compose(
        quad: &AffinityQuad,
        sim_drug: f64,
        sim_protein: f64,
        weights: &RewardWeights,
        scope: SignScope,
    ) -> Self {
        let delta_sjoint = quad.delta_sjoint(scope);
        RewardBreakdown {
            delta_total: quad.delta_total(),
            delta_joint: quad.delta_joint(),
            delta_sjoint,
            sim_drug,
            sim_protein,
            reward: combine(weights, delta_sjoint, sim_drug, sim_protein),
        }
    }
}

/// `α_r · Δ_sjoint + α_p · sim_p + α_d · sim_d`, summed in that order.
pub fn combine(weights: &RewardWeights, delta_sjoint: f64, sim_drug: f64, sim_protein: f64) -> f64 {
    weights.alpha_r * delta_sjoint + weights.alpha_p * sim_protein + weights.alpha_d * sim_drug
}

pub fn delta_affinity(
    oracle: &dyn AffinityOracle,
    d: &MolGraph,
    p: &ProteinSeq,
    d2: &MolGraph,
    p2: &ProteinSeq,
) -> Result<f64, OracleError> {
    Ok((oracle.predict(d2, p2)? - oracle.predict(d, p)?).abs())
}

pub fn delta_joint(
    oracle: &dyn AffinityOracle,
    d: &MolGraph,
    p: &ProteinSeq,
    d2: &MolGraph,
    p2: &ProteinSeq,
) -> Result<f64, OracleError> {
    Ok(AffinityQuad::query(oracle, d, p, d2, p2)?.delta_joint())
}

pub fn delta_sjoint(
    oracle: &dyn AffinityOracle,
    d: &MolGraph,
    p: &ProteinSeq,
    d2: &MolGraph,
    p2: &ProteinSeq,
    scope: SignScope,
) -> Result<f64, OracleError> {
    Ok(AffinityQuad::query(oracle, d, p, d2, p2)?.delta_sjoint(scope))
}

/// Similarity of two instances under the oracle's encoders.
pub fn similarities(
    oracle: &dyn AffinityOracle,
    d: &MolGraph,
    p: &ProteinSeq,
    d2: &MolGraph,
    p2: &ProteinSeq,
) -> Result<(f64, f64), OracleError> {
    let sim_drug = cosine_similarity(&oracle.encode_drug(d), &oracle.encode_drug(d2))?;
    let sim_protein = cosine_similarity(&oracle.encode_protein(p), &oracle.encode_protein(p2))?;
    Ok((sim_drug, sim_protein))
}

pub fn total_reward(
    weights: &RewardWeights,
    oracle: &dyn AffinityOracle,
    d: &MolGraph,
    p: &ProteinSeq,
    d2: &MolGraph,
    p2: &ProteinSeq,
    scope: SignScope,
) -> Result<RewardBreakdown, OracleError> {
    let quad = AffinityQuad::query(oracle, d, p, d2, p2)?;
    let (sim_drug, sim_protein) = similarities(oracle, d, p, d2, p2)?;
    Ok(RewardBreakdown::compose(&quad, sim_drug, sim_protein, weights, scope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Surrogate, SurrogateSpec};
    use crate::smiles::parse_smiles;

    fn quad(reference: f64, drug_only: f64, protein_only: f64, joint: f64) -> AffinityQuad {
        AffinityQuad {
            reference,
            drug_only,
            protein_only,
            joint,
        }
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign(0.0), 0.0);
        assert_eq!(sign(-0.0), 0.0);
        assert_eq!(sign(3.0), 1.0);
        assert_eq!(sign(-1e-300), -1.0);
    }

    #[test]
    fn delta_total_is_absolute() {
        assert_eq!(quad(7.0, 7.0, 7.0, 5.0).delta_total(), 2.0);
        assert_eq!(quad(5.0, 5.0, 5.0, 7.0).delta_total(), 2.0);
    }

    #[test]
    fn sign_corrected_examples() {
        let down = quad(7.0, 6.5, 7.3, 5.0);
        assert!((down.delta_sjoint(SignScope::LeadingTerm) - 1.2).abs() < 1e-12);
        let up = quad(7.0, 6.5, 7.3, 9.0);
        assert!((up.delta_sjoint(SignScope::LeadingTerm) + 2.8).abs() < 1e-12);
        assert_eq!(quad(7.0, 7.0, 7.0, 7.0).delta_sjoint(SignScope::LeadingTerm), 0.0);
        // the alternative scope flips the whole bracket
        assert!((down.delta_sjoint(SignScope::AllTerms) - 1.2).abs() < 1e-12);
        assert!((up.delta_sjoint(SignScope::AllTerms) + 1.2).abs() < 1e-12);
    }

    #[test]
    fn downward_moves_score_higher() {
        for m in [0.1, 1.0, 3.0] {
            let down = quad(7.0, 7.0 - 0.2, 7.0 + 0.1, 7.0 - m);
            let up = quad(7.0, 7.0 - 0.2, 7.0 + 0.1, 7.0 + m);
            assert!(down.delta_sjoint(SignScope::LeadingTerm) > up.delta_sjoint(SignScope::LeadingTerm));
        }
    }

    #[test]
    fn recomposition_examples() {
        let w = RewardWeights::default();
        let r = combine(&w, 1.2, 0.95, 0.999);
        assert!((r - 1.25749).abs() <= 1e-12 * 1.25749);
        assert_eq!(combine(&RewardWeights::zero(), 3.0, 0.2, 0.7), 0.0);
        let b = RewardBreakdown::compose(&quad(7.0, 6.5, 7.3, 5.0), 0.95, 0.999, &w, SignScope::LeadingTerm);
        assert_eq!(b.reward, combine(&w, b.delta_sjoint, b.sim_drug, b.sim_protein));
    }

    #[test]
    fn identity_counterfactual() {
        let oracle = Surrogate::new(SurrogateSpec::new(9)).unwrap();
        let d = parse_smiles("CC(=O)Nc1ccccc1").unwrap();
        let p = ProteinSeq::new("PFWKYY").unwrap();
        assert_eq!(delta_affinity(&oracle, &d, &p, &d, &p).unwrap(), 0.0);
        assert_eq!(delta_joint(&oracle, &d, &p, &d, &p).unwrap(), 0.0);
        assert_eq!(
            delta_sjoint(&oracle, &d, &p, &d, &p, SignScope::LeadingTerm).unwrap(),
            0.0
        );
        let w = RewardWeights::default();
        let b = total_reward(&w, &oracle, &d, &p, &d, &p, SignScope::LeadingTerm).unwrap();
        assert_eq!(b.reward, w.alpha_p + w.alpha_d);
        assert!((b.reward - 0.06).abs() < 1e-15);
    }

    #[test]
    fn weights_validate_and_default_from_json() {
        let w: RewardWeights = serde_json::from_str("{}").unwrap();
        assert_eq!(w, RewardWeights::default());
        assert!(RewardWeights { alpha_d: -0.1, ..w }.validate().is_err());
        assert!(RewardWeights { alpha_r: f64::NAN, ..w }.validate().is_err());
    }
}
