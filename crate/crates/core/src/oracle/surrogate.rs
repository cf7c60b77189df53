//! Deterministic surrogate predictor with planted drug-protein interactions.
//!
//! ```text
//! F(d, p) = clamp(base + Σ_b w_d[b]·fp(d)[b] + Σ_t w_p[t]·kmer(p)[t]
//!                 − Σ_i η_i · fp(d)[b_i] · mutated(p, window_i), 0, 15)
//! ```
//!
//! A window counts as mutated when any residue in it differs from the
//! recorded reference residues. An interaction therefore only fires when the
//! drug carries bit `b` and the protein window has been changed: its mixed
//! second difference is `−η` for an edit that creates bit `b` paired with a
//! mutation inside the window, and zero for every edit that leaves either
//! side of the interaction untouched.

use super::{trigram_indices, AffinityOracle, Encoders, OracleError, KMER_DIM};
use crate::molgraph::{compute_fingerprint, Fingerprint, MolGraph, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};
use crate::protein::ProteinSeq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Predictions are clamped to the pK_d range of the Davis data.
pub const AFFINITY_RANGE: (f64, f64) = (0.0, 15.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInteraction {
    /// Fingerprint bit that marks the drug substructure.
    pub bit: usize,
    /// First residue index of the contact window.
    pub window_start: usize,
    /// Unmutated residues of the window.
    pub reference: String,
    /// Affinity lost when the window is mutated while the bit is present.
    pub strength: f64,
}

impl PlantedInteraction {
    pub fn window(&self) -> std::ops::Range<usize> {
        self.window_start..self.window_start + self.reference.len()
    }

    pub fn window_mutated(&self, p: &ProteinSeq) -> bool {
        p.residues()
            .get(self.window()) != Some(self.reference.as_bytes())
    }
}

fn default_base() -> f64 {
    7.0
}
fn default_scale() -> f64 {
    0.05
}
fn default_radius() -> usize {
    DEFAULT_FP_RADIUS
}
fn default_bits() -> usize {
    DEFAULT_FP_BITS
}

/// Serializable description of a surrogate. Weight vectors are not stored;
/// they are regenerated from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub seed: u64,
    #[serde(default = "default_base")]
    pub base: f64,
    /// Drug weights are drawn uniformly from `[-drug_scale, drug_scale]`.
    #[serde(default = "default_scale")]
    pub drug_scale: f64,
    #[serde(default = "default_scale")]
    pub protein_scale: f64,
    #[serde(default = "default_radius")]
    pub fp_radius: usize,
    #[serde(default = "default_bits")]
    pub fp_bits: usize,
    #[serde(default)]
    pub interactions: Vec<PlantedInteraction>,
}

impl SurrogateSpec {
    pub fn new(seed: u64) -> Self {
        SurrogateSpec {
            seed,
            base: default_base(),
            drug_scale: default_scale(),
            protein_scale: default_scale(),
            fp_radius: default_radius(),
            fp_bits: default_bits(),
            interactions: Vec::new(),
        }
    }

    pub fn with_interaction(mut self, interaction: PlantedInteraction) -> Self {
        self.interactions.push(interaction);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Surrogate {
    spec: SurrogateSpec,
    drug_weights: Vec<f64>,
    protein_weights: Vec<f64>,
    encoders: Encoders,
}

impl Surrogate {
    pub fn new(spec: SurrogateSpec) -> Result<Self, OracleError> {
        if spec.fp_bits == 0 {
            return Err(OracleError::Spec("fp_bits must be positive".into()));
        }
        if !(spec.base.is_finite() && spec.drug_scale >= 0.0 && spec.protein_scale >= 0.0) {
            return Err(OracleError::Spec("base and scales must be finite and non-negative".into()));
        }
        for i in &spec.interactions {
            if i.bit >= spec.fp_bits {
                return Err(OracleError::Spec(format!("interaction bit {} out of range", i.bit)));
            }
            if i.reference.is_empty() || ProteinSeq::new(&i.reference).is_err() {
                return Err(OracleError::Spec(format!(
                    "interaction window {:?} is not a residue string",
                    i.reference
                )));
            }
            if !i.strength.is_finite() {
                return Err(OracleError::Spec("interaction strength must be finite".into()));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let drug_weights = (0..spec.fp_bits)
            .map(|_| rng.gen_range(-1.0..=1.0) * spec.drug_scale)
            .collect();
        let protein_weights = (0..KMER_DIM)
            .map(|_| rng.gen_range(-1.0..=1.0) * spec.protein_scale)
            .collect();
        let encoders = Encoders {
            fp_radius: spec.fp_radius,
            fp_bits: spec.fp_bits,
        };
        Ok(Surrogate {
            spec,
            drug_weights,
            protein_weights,
            encoders,
        })
    }

    pub fn spec(&self) -> &SurrogateSpec {
        &self.spec
    }

    pub fn drug_weights(&self) -> &[f64] {
        &self.drug_weights
    }

    pub fn protein_weights(&self) -> &[f64] {
        &self.protein_weights
    }

    pub fn fingerprint(&self, drug: &MolGraph) -> Fingerprint {
        compute_fingerprint(drug, self.spec.fp_radius, self.spec.fp_bits)
            .expect("fp_bits validated")
    }

    /// Value before clamping.
    pub fn raw_predict(&self, drug: &MolGraph, protein: &ProteinSeq) -> f64 {
        let fp = self.fingerprint(drug);
        let drug_term: f64 = fp.ones().map(|b| self.drug_weights[b]).sum();
        let protein_term: f64 = trigram_indices(protein)
            .map(|t| self.protein_weights[t])
            .sum();
        let interaction: f64 = self
            .spec
            .interactions
            .iter()
            .filter(|i| fp.get(i.bit) && i.window_mutated(protein))
            .map(|i| i.strength)
            .sum();
        self.spec.base + drug_term + protein_term - interaction
    }
}

impl AffinityOracle for Surrogate {
    fn predict(&self, drug: &MolGraph, protein: &ProteinSeq) -> Result<f64, OracleError> {
        let (lo, hi) = AFFINITY_RANGE;
        Ok(self.raw_predict(drug, protein).clamp(lo, hi))
    }

    fn encode_drug(&self, drug: &MolGraph) -> Vec<f64> {
        self.encoders.drug(drug)
    }

    fn encode_protein(&self, protein: &ProteinSeq) -> Vec<f64> {
        self.encoders.protein(protein)
    }
}
