//! Attributed molecular graphs with valence bookkeeping.
//!
//! Hydrogens are never stored as atoms. Every atom's free valence is filled
//! with implicit hydrogens, so the graph only carries heavy atoms and the
//! bonds between them.

mod certificate;
mod fingerprint;

pub use certificate::{canonical_certificate, canonical_ranking, Certificate};
pub use fingerprint::{compute_fingerprint, tanimoto, Fingerprint, DEFAULT_FP_BITS, DEFAULT_FP_RADIUS};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

/// Errors raised while building or querying a [`MolGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a molecule needs at least one atom")]
    Empty,
    #[error("atom index {index} out of range for {count} atoms")]
    AtomIndex { index: usize, count: usize },
    #[error("bond joins atom {0} to itself")]
    SelfBond(usize),
    #[error("more than one bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("atom {atom} uses valence {used}, maximum is {max}")]
    Valence { atom: usize, used: u32, max: u32 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("aromatic bond between {0} and {1} needs two aromatic atoms")]
    AromaticBond(usize, usize),
    #[error("element {0} cannot be aromatic")]
    AromaticElement(Element),
    #[error("fingerprint needs at least one bit")]
    FingerprintBits,
    #[error("fingerprint lengths differ ({0} vs {1})")]
    FingerprintLength(usize, usize),
    #[error("permutation does not cover {0} atoms")]
    Permutation(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == symbol)
    }

    /// Highest neutral valence the element may reach.
    pub fn max_valence(self) -> u32 {
        match self {
            Element::B => 3,
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
            Element::P => 5,
            Element::S => 6,
            Element::F | Element::Cl | Element::Br | Element::I => 1,
        }
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::P => 15,
            Element::S => 16,
            Element::F => 9,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Standard atomic weight in daltons.
    pub fn mass(self) -> f64 {
        match self {
            Element::B => 10.81,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::F => 18.998,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
        }
    }

    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    /// Valence limit after accounting for a formal charge, using the
    /// isoelectronic rule (N+ behaves like C, O- like F, and so on).
    pub fn charged_valence(self, charge: i8) -> u32 {
        let q = i32::from(charge);
        let base = self.max_valence() as i32;
        let v = match self {
            Element::B => base - q,
            Element::C => base - q.abs(),
            Element::N | Element::P | Element::O | Element::S => base + q,
            Element::F | Element::Cl | Element::Br | Element::I => base - q.abs(),
        };
        v.max(0) as u32
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to valence in half-bond units (aromatic counts 1.5).
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Integer order for the three Kekulé orders.
    pub fn integer(self) -> Option<u32> {
        match self {
            BondOrder::Single => Some(1),
            BondOrder::Double => Some(2),
            BondOrder::Triple => Some(3),
            BondOrder::Aromatic => None,
        }
    }

    pub fn from_integer(order: u32) -> Option<BondOrder> {
        match order {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub charge: i8,
    /// Hydrogens written explicitly inside a bracket atom.
    pub explicit_h: u8,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            aromatic: false,
            charge: 0,
            explicit_h: 0,
        }
    }

    pub fn aromatic(element: Element) -> Self {
        Atom {
            aromatic: true,
            ..Atom::new(element)
        }
    }

    pub fn max_valence(&self) -> u32 {
        self.element.charged_valence(self.charge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    a: usize,
    b: usize,
    pub order: BondOrder,
}

impl Bond {
    /// Endpoints are stored with the smaller index first.
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Bond {
            a: a.min(b),
            b: a.max(b),
            order,
        }
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A connected heavy-atom graph. Immutable once built; edits return new graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// (neighbor, bond index) per atom.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolGraph {
    /// Builds and validates a graph: indices, duplicate bonds, aromatic
    /// consistency, valence limits and connectivity.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let graph = Self::unchecked(atoms, bonds)?;
        graph.validate()?;
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(graph)
    }

    /// Structural checks only; connectivity and valence are left to the caller.
    fn unchecked(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        if atoms.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = atoms.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(bonds.len());
        for (k, bond) in bonds.iter().enumerate() {
            let (a, b) = bond.endpoints();
            if a == b {
                return Err(GraphError::SelfBond(a));
            }
            if b >= n {
                return Err(GraphError::AtomIndex { index: b, count: n });
            }
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateBond(a, b));
            }
            adjacency[a].push((b, k));
            adjacency[b].push((a, k));
        }
        Ok(MolGraph {
            atoms,
            bonds,
            adjacency,
        })
    }

    fn validate(&self) -> Result<(), GraphError> {
        for atom in &self.atoms {
            if atom.aromatic && !atom.element.can_be_aromatic() {
                return Err(GraphError::AromaticElement(atom.element));
            }
        }
        for bond in &self.bonds {
            let (a, b) = bond.endpoints();
            if bond.order == BondOrder::Aromatic
                && !(self.atoms[a].aromatic && self.atoms[b].aromatic)
            {
                return Err(GraphError::AromaticBond(a, b));
            }
        }
        for i in 0..self.atoms.len() {
            let used = self.explicit_valence(i);
            let max = self.atoms[i].max_valence();
            if used > max {
                return Err(GraphError::Valence { atom: i, used, max });
            }
        }
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Neighbors of `i` with the order of the connecting bond.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.adjacency[i]
            .iter()
            .map(move |&(j, k)| (j, self.bonds[k].order))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, i: usize, j: usize) -> Option<BondOrder> {
        self.adjacency
            .get(i)?
            .iter()
            .find(|&&(n, _)| n == j)
            .map(|&(_, k)| self.bonds[k].order)
    }

    /// Valence consumed by bonds and bracket hydrogens.
    ///
    /// Aromatic bonds count 1.5 each and the total is rounded down. An
    /// aromatic atom that would still exceed its limit is treated as a
    /// lone-pair donor (pyrrole nitrogen, furan oxygen) and counted one lower.
    pub fn explicit_valence(&self, i: usize) -> u32 {
        let atom = &self.atoms[i];
        let half: u32 = self.adjacency[i]
            .iter()
            .map(|&(_, k)| self.bonds[k].order.half_units())
            .sum::<u32>()
            + 2 * u32::from(atom.explicit_h);
        let mut used = half / 2;
        let has_aromatic_bond = self.adjacency[i]
            .iter()
            .any(|&(_, k)| self.bonds[k].order == BondOrder::Aromatic);
        if atom.aromatic && has_aromatic_bond && used == atom.max_valence() + 1 {
            used -= 1;
        }
        used
    }

    /// Remaining valence, i.e. the implicit hydrogen count.
    pub fn free_valence(&self, i: usize) -> u32 {
        self.atoms[i].max_valence().saturating_sub(self.explicit_valence(i))
    }

    pub fn implicit_hydrogens(&self, i: usize) -> u32 {
        self.free_valence(i)
    }

    pub fn total_hydrogens(&self, i: usize) -> u32 {
        self.free_valence(i) + u32::from(self.atoms[i].explicit_h)
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Connected components as sorted atom index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Marks bonds that lie on at least one cycle.
    pub fn ring_bonds(&self) -> Vec<bool> {
        // Tarjan bridge finding; every non-bridge bond is a ring bond.
        let n = self.atoms.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut in_ring = vec![true; self.bonds.len()];
        let mut timer = 0;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // (atom, bond used to enter, next adjacency slot)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (u, parent_bond, ref mut slot)) = stack.last_mut() {
                if *slot < self.adjacency[u].len() {
                    let (v, k) = self.adjacency[u][*slot];
                    *slot += 1;
                    if k == parent_bond {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        stack.push((v, k, 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            in_ring[parent_bond] = false;
                        }
                    }
                }
            }
        }
        in_ring
    }

    /// Returns the same molecule with atom `i` moved to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<MolGraph, GraphError> {
        let n = self.atoms.len();
        let mut check = vec![false; n];
        if perm.len() != n {
            return Err(GraphError::Permutation(n));
        }
        for &p in perm {
            if p >= n || check[p] {
                return Err(GraphError::Permutation(n));
            }
            check[p] = true;
        }
        let mut atoms = vec![self.atoms[0]; n];
        for (i, atom) in self.atoms.iter().enumerate() {
            atoms[perm[i]] = *atom;
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| {
                let (a, c) = b.endpoints();
                Bond::new(perm[a], perm[c], b.order)
            })
            .collect();
        MolGraph::new(atoms, bonds)
    }

    /// Appends a new atom bonded to `site`.
    pub fn with_added_atom(
        &self,
        site: usize,
        atom: Atom,
        order: BondOrder,
    ) -> Result<MolGraph, GraphError> {
        self.check_index(site)?;
        let mut atoms = self.atoms.clone();
        atoms.push(atom);
        let mut bonds = self.bonds.clone();
        bonds.push(Bond::new(site, atoms.len() - 1, order));
        MolGraph::new(atoms, bonds)
    }

    /// Sets the bond between `i` and `j` to `order`, removing it for `None`.
    ///
    /// Removing a bridge keeps the larger fragment; equal-size fragments are
    /// decided by the smaller canonical certificate.
    pub fn with_bond(
        &self,
        i: usize,
        j: usize,
        order: Option<BondOrder>,
    ) -> Result<MolGraph, GraphError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(GraphError::SelfBond(i));
        }
        let (a, b) = (i.min(j), i.max(j));
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .filter(|bd| bd.endpoints() != (a, b))
            .copied()
            .collect();
        if let Some(order) = order {
            bonds.push(Bond::new(a, b, order));
        }
        let graph = MolGraph::unchecked(self.atoms.clone(), bonds)?;
        graph.validate()?;
        let comps = graph.components();
        if comps.len() == 1 {
            return Ok(graph);
        }
        let mut best: Option<(MolGraph, usize, Certificate)> = None;
        for comp in comps {
            let frag = graph.induced(&comp)?;
            let size = comp.len();
            let cert = canonical_certificate(&frag);
            let better = match &best {
                None => true,
                Some((_, bsize, bcert)) => size > *bsize || (size == *bsize && cert < *bcert),
            };
            if better {
                best = Some((frag, size, cert));
            }
        }
        Ok(best.expect("at least one component").0)
    }

    /// Subgraph on the given atoms (sorted), reindexed in that order.
    pub fn induced(&self, keep: &[usize]) -> Result<MolGraph, GraphError> {
        let mut index = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            self.check_index(old)?;
            index[old] = new;
        }
        let atoms = keep.iter().map(|&i| self.atoms[i]).collect();
        let bonds = self
            .bonds
            .iter()
            .filter_map(|b| {
                let (x, y) = b.endpoints();
                (index[x] != usize::MAX && index[y] != usize::MAX)
                    .then(|| Bond::new(index[x], index[y], b.order))
            })
            .collect();
        MolGraph::new(atoms, bonds)
    }

    fn check_index(&self, i: usize) -> Result<(), GraphError> {
        if i < self.atoms.len() {
            Ok(())
        } else {
            Err(GraphError::AtomIndex {
                index: i,
                count: self.atoms.len(),
            })
        }
    }
}

/// Free valence of atom `i`: its valence limit minus the bond orders it uses.
pub fn atom_free_valence(g: &MolGraph, i: usize) -> Result<u32, GraphError> {
    g.check_index(i)?;
    Ok(g.free_valence(i))
}
