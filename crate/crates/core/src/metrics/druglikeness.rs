//! Descriptor-based drug-likeness proxy.
//!
//! Five descriptors are mapped through piecewise-linear desirabilities and
//! combined by geometric mean:
//!
//! | descriptor        | 1 on        | 0 at         |
//! |-------------------|-------------|--------------|
//! | molecular weight  | 200 to 500  | ≤ 60, ≥ 800  |
//! | H-bond donors     | ≤ 5         | ≥ 10         |
//! | H-bond acceptors  | ≤ 10        | ≥ 20         |
//! | rotatable bonds   | ≤ 10        | ≥ 20         |
//! | aromatic rings    | 1 to 3      | never        |
//!
//! Aromatic ring desirability is 0.5 for no rings, 0.5 for four and 0.25
//! beyond. A single zero term makes the whole score zero. This is not
//! RDKit QED and its numbers are not comparable with it.

use crate::molgraph::{BondOrder, Element, MolGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

const HYDROGEN_MASS: f64 = 1.008;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptors {
    pub molecular_weight: f64,
    pub donors: usize,
    pub acceptors: usize,
    pub rotatable: usize,
    pub aromatic_rings: usize,
}

/// Linear ramp through `(x0, y0)` and `(x1, y1)`, flat outside.
fn ramp(x: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    if x <= x0 {
        y0
    } else if x >= x1 {
        y1
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn hetero(e: Element) -> bool {
    matches!(e, Element::N | Element::O)
}

impl Descriptors {
    pub fn compute(g: &MolGraph) -> Self {
        let molecular_weight = (0..g.atom_count())
            .map(|i| g.atom(i).element.mass() + HYDROGEN_MASS * g.total_hydrogens(i) as f64)
            .sum();
        let donors = (0..g.atom_count())
            .filter(|&i| hetero(g.atom(i).element) && g.total_hydrogens(i) > 0)
            .count();
        let acceptors = (0..g.atom_count()).filter(|&i| hetero(g.atom(i).element)).count();
        let in_ring = g.ring_bonds();
        let rotatable = g
            .bonds()
            .iter()
            .zip(&in_ring)
            .filter(|(b, &ring)| {
                let (a, c) = b.endpoints();
                b.order == BondOrder::Single && !ring && g.degree(a) >= 2 && g.degree(c) >= 2
            })
            .count();
        Descriptors {
            molecular_weight,
            donors,
            acceptors,
            rotatable,
            aromatic_rings: aromatic_rings(g),
        }
    }

    pub fn desirabilities(&self) -> [f64; 5] {
        let mw = self.molecular_weight;
        let d_mw = if mw <= 500.0 {
            ramp(mw, 60.0, 0.0, 200.0, 1.0)
        } else {
            ramp(mw, 500.0, 1.0, 800.0, 0.0)
        };
        let d_ar = match self.aromatic_rings {
            0 => 0.5,
            1..=3 => 1.0,
            4 => 0.5,
            _ => 0.25,
        };
        [
            d_mw,
            ramp(self.donors as f64, 5.0, 1.0, 10.0, 0.0),
            ramp(self.acceptors as f64, 10.0, 1.0, 20.0, 0.0),
            ramp(self.rotatable as f64, 10.0, 1.0, 20.0, 0.0),
            d_ar,
        ]
    }
}

/// Score in `[0, 1]`.
pub fn druglikeness(g: &MolGraph) -> f64 {
    let d = Descriptors::compute(g).desirabilities();
    if d.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    let log_mean = d.iter().map(|x| x.ln()).sum::<f64>() / d.len() as f64;
    log_mean.exp().clamp(0.0, 1.0)
}

/// Smallest ring through each ring bond, deduplicated by atom set.
fn smallest_rings(g: &MolGraph) -> Vec<Vec<usize>> {
    let in_ring = g.ring_bonds();
    let mut seen = BTreeSet::new();
    let mut rings = Vec::new();
    for (k, bond) in g.bonds().iter().enumerate() {
        if !in_ring[k] {
            continue;
        }
        let (a, b) = bond.endpoints();
        // shortest a→b path avoiding the bond itself
        let mut prev = vec![usize::MAX; g.atom_count()];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for (v, _) in g.neighbors(u) {
                if prev[v] == usize::MAX && !(u == a && v == b) {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[b] == usize::MAX {
            continue;
        }
        let mut ring = vec![b];
        let mut u = b;
        while u != a {
            u = prev[u];
            ring.push(u);
        }
        let key: BTreeSet<usize> = ring.iter().copied().collect();
        if seen.insert(key) {
            rings.push(ring);
        }
    }
    rings
}

/// A ring counts as aromatic when every atom carries the aromatic flag, or
/// when it is a six-membered ring of alternating single and double bonds.
fn aromatic_rings(g: &MolGraph) -> usize {
    smallest_rings(g)
        .into_iter()
        .filter(|ring| {
            if ring.iter().all(|&i| g.atom(i).aromatic) {
                return true;
            }
            if ring.len() != 6 {
                return false;
            }
            let doubles = (0..6)
                .filter(|&k| g.bond_between(ring[k], ring[(k + 1) % 6]) == Some(BondOrder::Double))
                .count();
            doubles == 3
        })
        .count()
}
