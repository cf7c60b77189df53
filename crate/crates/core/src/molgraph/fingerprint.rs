//! Circular (ECFP-style) fingerprints and Tanimoto similarity.
//!
//! Identifiers are 64-bit values produced by a splitmix64-based mixer.
//! Radius 0 hashes the atom invariant (atomic number, degree, explicit
//! valence, free valence, aromatic flag, charge); every further radius hashes
//! the previous identifier together with the sorted multiset of
//! `(bond code, neighbor identifier)` pairs. Each identifier sets bit
//! `identifier % nbits`.

use super::{GraphError, MolGraph};

pub const DEFAULT_FP_BITS: usize = 2048;
pub const DEFAULT_FP_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: usize,
}

impl Fingerprint {
    pub fn empty(nbits: usize, radius: usize) -> Self {
        Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        }
    }

    /// Builds a fingerprint with the listed bits set (indices taken modulo `nbits`).
    pub fn from_bits(nbits: usize, bits: &[usize]) -> Self {
        let mut fp = Fingerprint::empty(nbits, 0);
        for &b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn set(&mut self, pos: usize) {
        let pos = pos % self.nbits;
        self.words[pos / 64] |= 1u64 << (pos % 64);
    }

    pub fn get(&self, pos: usize) -> bool {
        pos < self.nbits && (self.words[pos / 64] >> (pos % 64)) & 1 == 1
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// The fingerprint as a 0/1 real vector.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nbits];
        for b in self.ones() {
            out[b] = 1.0;
        }
        out
    }
}

pub(crate) const fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn hash_words(words: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &w in words {
        h = mix64(h.rotate_left(23) ^ w);
    }
    h
}

pub fn compute_fingerprint(
    g: &MolGraph,
    radius: usize,
    nbits: usize,
) -> Result<Fingerprint, GraphError> {
    if nbits == 0 {
        return Err(GraphError::FingerprintBits);
    }
    let n = g.atom_count();
    let mut fp = Fingerprint::empty(nbits, radius);
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let atom = g.atom(i);
            hash_words(&[
                u64::from(atom.element.atomic_number()),
                g.degree(i) as u64,
                u64::from(g.explicit_valence(i)),
                u64::from(g.free_valence(i)),
                u64::from(atom.aromatic),
                (i64::from(atom.charge) + 16) as u64,
            ])
        })
        .collect();
    for &id in &ids {
        fp.set((id % nbits as u64) as usize);
    }
    let mut env: Vec<u64> = Vec::new();
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for layer in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                pairs.clear();
                pairs.extend(g.neighbors(i).map(|(j, o)| (u64::from(o.code()), ids[j])));
                pairs.sort_unstable();
                env.clear();
                env.push(layer as u64);
                env.push(ids[i]);
                for &(o, id) in &pairs {
                    env.push(o);
                    env.push(id);
                }
                hash_words(&env)
            })
            .collect();
        for &id in &next {
            fp.set((id % nbits as u64) as usize);
        }
        ids = next;
    }
    Ok(fp)
}

/// |a ∧ b| / |a ∨ b|, with two empty fingerprints scoring 1.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, GraphError> {
    if a.nbits != b.nbits {
        return Err(GraphError::FingerprintLength(a.nbits, b.nbits));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(inter) / f64::from(union))
}
