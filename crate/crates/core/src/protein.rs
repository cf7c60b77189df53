//! Protein sequences, integer encoding and alanine substitution.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The twenty standard residues in alphabetical order; code = index + 1.
pub const ALPHABET: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Encoded observations are padded or truncated to this many residues.
pub const ENCODED_LENGTH: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProteinError {
    #[error("empty protein sequence")]
    Empty,
    #[error("invalid residue {residue:?} at position {position}")]
    InvalidResidue { position: usize, residue: char },
    #[error("position {position} out of range for length {length}")]
    Position { position: usize, length: usize },
    #[error("residue at position {0} is already alanine")]
    AlreadyAlanine(usize),
}

/// Index of a residue letter in [`ALPHABET`].
pub fn residue_index(residue: u8) -> Option<usize> {
    ALPHABET.iter().position(|&r| r == residue)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ProteinSeq(Vec<u8>);

impl ProteinSeq {
    pub fn new(sequence: &str) -> Result<Self, ProteinError> {
        if sequence.is_empty() {
            return Err(ProteinError::Empty);
        }
        for (position, ch) in sequence.chars().enumerate() {
            if !ch.is_ascii() || residue_index(ch as u8).is_none() {
                return Err(ProteinError::InvalidResidue {
                    position,
                    residue: ch,
                });
            }
        }
        Ok(ProteinSeq(sequence.as_bytes().to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn residues(&self) -> &[u8] {
        &self.0
    }

    pub fn residue(&self, i: usize) -> Option<char> {
        self.0.get(i).map(|&r| r as char)
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("validated ASCII")
    }

    /// Positions where `self` and `other` differ (over the shared prefix),
    /// plus any length difference.
    pub fn hamming(&self, other: &ProteinSeq) -> usize {
        let shared = self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count();
        shared + self.len().abs_diff(other.len())
    }
}

impl fmt::Display for ProteinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<String> for ProteinSeq {
    type Error = ProteinError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        ProteinSeq::new(&value)
    }
}

impl From<ProteinSeq> for String {
    fn from(value: ProteinSeq) -> Self {
        value.as_str().to_string()
    }
}

/// Fixed-length integer encoding: letters map to 1..=20, padding is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedProtein(Vec<u8>);

impl EncodedProtein {
    pub fn codes(&self) -> &[u8] {
        &self.0
    }
}

pub fn encode_protein(p: &ProteinSeq) -> EncodedProtein {
    let mut codes = vec![0u8; ENCODED_LENGTH];
    for (slot, &r) in codes.iter_mut().zip(p.residues()) {
        *slot = residue_index(r).expect("validated residue") as u8 + 1;
    }
    EncodedProtein(codes)
}

/// Copy of `p` with residue `i` replaced by alanine.
pub fn mutate_to_alanine(p: &ProteinSeq, i: usize) -> Result<ProteinSeq, ProteinError> {
    match p.0.get(i) {
        None => Err(ProteinError::Position {
            position: i,
            length: p.len(),
        }),
        Some(b'A') => Err(ProteinError::AlreadyAlanine(i)),
        Some(_) => {
            let mut residues = p.0.clone();
            residues[i] = b'A';
            Ok(ProteinSeq(residues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_alphabetically() {
        let p = ProteinSeq::new("PFWKYY").unwrap();
        let enc = encode_protein(&p);
        assert_eq!(&enc.codes()[..8], &[13, 5, 19, 9, 20, 20, 0, 0]);
        assert_eq!(enc.codes().len(), ENCODED_LENGTH);
        assert!(enc.codes()[6..].iter().all(|&c| c == 0));
    }

    #[test]
    fn truncates_long_sequences() {
        let long: String = std::iter::repeat_n("ACDEFGHIKLMNPQRSTVWY", 60).collect();
        let p = ProteinSeq::new(&long).unwrap();
        assert_eq!(p.len(), 1200);
        let enc = encode_protein(&p);
        assert_eq!(enc.codes().len(), ENCODED_LENGTH);
        assert!(enc.codes().iter().all(|&c| c != 0));
    }

    #[test]
    fn alanine_mutation() {
        let p = ProteinSeq::new("PFWKYY").unwrap();
        assert_eq!(mutate_to_alanine(&p, 1).unwrap().as_str(), "PAWKYY");
        assert_eq!(mutate_to_alanine(&p, 0).unwrap().as_str(), "AFWKYY");
        assert_eq!(
            mutate_to_alanine(&p, 6),
            Err(ProteinError::Position {
                position: 6,
                length: 6
            })
        );
        let ala = ProteinSeq::new("AAAA").unwrap();
        for i in 0..4 {
            assert_eq!(mutate_to_alanine(&ala, i), Err(ProteinError::AlreadyAlanine(i)));
        }
        let once = mutate_to_alanine(&p, 3).unwrap();
        assert_eq!(mutate_to_alanine(&once, 3), Err(ProteinError::AlreadyAlanine(3)));
    }

    #[test]
    fn validation() {
        assert_eq!(ProteinSeq::new(""), Err(ProteinError::Empty));
        assert_eq!(
            ProteinSeq::new("PFXK"),
            Err(ProteinError::InvalidResidue {
                position: 2,
                residue: 'X'
            })
        );
        assert!(ProteinSeq::new("pfwk").is_err());
    }

    #[test]
    fn serde_validates() {
        let p: ProteinSeq = serde_json::from_str("\"PFWKYY\"").unwrap();
        assert_eq!(p.len(), 6);
        assert!(serde_json::from_str::<ProteinSeq>("\"PFWKZ\"").is_err());
    }
}
