//! Black-box affinity predictors and their similarity encoders.

mod subprocess;
mod surrogate;

pub use subprocess::SubprocessOracle;
pub use surrogate::{PlantedInteraction, Surrogate, SurrogateSpec, AFFINITY_RANGE};

use crate::molgraph::{compute_fingerprint, MolGraph, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};
use crate::protein::{residue_index, ProteinSeq};
use thiserror::Error;

/// Number of distinct residue trigrams.
pub const KMER_DIM: usize = 8000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("vector dimensions differ ({0} vs {1})")]
    Dimension(usize, usize),
    #[error("predictor process: {0}")]
    Process(String),
    #[error("predictor replied {0:?}, expected a decimal number")]
    BadReply(String),
    #[error("invalid surrogate spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A drug-target affinity predictor `F(D, P)` with encoders `F_e` used for
/// similarity terms.
pub trait AffinityOracle: Send + Sync {
    fn predict(&self, drug: &MolGraph, protein: &ProteinSeq) -> Result<f64, OracleError>;
    fn encode_drug(&self, drug: &MolGraph) -> Vec<f64>;
    fn encode_protein(&self, protein: &ProteinSeq) -> Vec<f64>;
}

/// Fingerprint and trigram-count encoders shared by the bundled oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoders {
    pub fp_radius: usize,
    pub fp_bits: usize,
}

impl Default for Encoders {
    fn default() -> Self {
        Encoders {
            fp_radius: DEFAULT_FP_RADIUS,
            fp_bits: DEFAULT_FP_BITS,
        }
    }
}

impl Encoders {
    pub fn drug(&self, drug: &MolGraph) -> Vec<f64> {
        compute_fingerprint(drug, self.fp_radius, self.fp_bits)
            .expect("fp_bits validated at construction")
            .to_dense()
    }

    pub fn protein(&self, protein: &ProteinSeq) -> Vec<f64> {
        let mut counts = vec![0.0; KMER_DIM];
        for t in trigram_indices(protein) {
            counts[t] += 1.0;
        }
        counts
    }
}

/// Index of every overlapping residue trigram, in sequence order.
pub fn trigram_indices(protein: &ProteinSeq) -> impl Iterator<Item = usize> + '_ {
    protein.residues().windows(3).map(|w| {
        w.iter().fold(0, |acc, &r| {
            acc * 20 + residue_index(r).expect("validated residue")
        })
    })
}

/// Cosine of the angle between `x` and `y`. Two zero vectors score 1, a zero
/// against a nonzero vector scores 0.
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64, OracleError> {
    if x.len() != y.len() {
        return Err(OracleError::Dimension(x.len(), y.len()));
    }
    let (mut dot, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        xx += a * a;
        yy += b * b;
    }
    match (xx == 0.0, yy == 0.0) {
        (true, true) => Ok(1.0),
        (true, false) | (false, true) => Ok(0.0),
        _ => Ok((dot / (xx.sqrt() * yy.sqrt())).clamp(-1.0, 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        let x = [1.0, 1.0];
        assert!((cosine_similarity(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&x, &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[0.0; 3], &[0.0; 3]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[0.0; 2], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(OracleError::Dimension(1, 2))
        ));
    }

    #[test]
    fn trigram_counts() {
        let p = ProteinSeq::new("AAAC").unwrap();
        let idx: Vec<_> = trigram_indices(&p).collect();
        assert_eq!(idx, vec![0, 1]);
        let enc = Encoders::default().protein(&p);
        assert_eq!(enc.iter().sum::<f64>(), 2.0);
        let short = ProteinSeq::new("AC").unwrap();
        assert!(Encoders::default().protein(&short).iter().all(|&v| v == 0.0));
    }
}
