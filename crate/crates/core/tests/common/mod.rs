//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use macda::actionspace::{enumerate_drug_actions, enumerate_protein_actions, DEFAULT_ADMISSIBLE};
use macda::molgraph::{canonical_certificate, Atom, Bond, BondOrder, Certificate, Element, MolGraph};
use macda::oracle::{AffinityOracle, PlantedInteraction, Surrogate, SurrogateSpec};
use macda::protein::ProteinSeq;
use macda::smiles::parse_smiles;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeSet, VecDeque};

/// Neutral valence used by the generators below.
pub fn valence(e: Element) -> u32 {
    match e {
        Element::C => 4,
        Element::N => 3,
        Element::O | Element::S => 2,
        Element::F | Element::Cl => 1,
        other => panic!("generator does not use {other:?}"),
    }
}

fn order_value(o: BondOrder) -> u32 {
    match o {
        BondOrder::Single => 2,
        BondOrder::Double => 4,
        BondOrder::Triple => 6,
        BondOrder::Aromatic => 3,
    }
}

/// Bond-order sum of atom `i` in half units.
fn used(atoms: &[Atom], bonds: &[Bond], i: usize) -> u32 {
    let _ = atoms;
    bonds
        .iter()
        .filter(|b| b.endpoints().0 == i || b.endpoints().1 == i)
        .map(|b| order_value(b.order))
        .sum()
}

fn free(atoms: &[Atom], bonds: &[Bond], i: usize) -> u32 {
    let cap = 2 * valence(atoms[i].element);
    cap.saturating_sub(used(atoms, bonds, i)) / 2
}

/// Random connected molecule with at most `max_atoms` heavy atoms. A third
/// of the molecules start from an aromatic six-ring when there is room.
pub fn random_graph<R: Rng>(rng: &mut R, max_atoms: usize) -> MolGraph {
    const POOL: [Element; 8] = [
        Element::C,
        Element::C,
        Element::C,
        Element::N,
        Element::O,
        Element::S,
        Element::F,
        Element::Cl,
    ];
    loop {
        let n = rng.gen_range(1..=max_atoms);
        let mut atoms: Vec<Atom> = Vec::new();
        let mut bonds: Vec<Bond> = Vec::new();
        if n >= 6 && rng.gen_bool(0.33) {
            for k in 0..6 {
                let e = if k == 0 && rng.gen_bool(0.3) { Element::N } else { Element::C };
                atoms.push(Atom::aromatic(e));
                if k > 0 {
                    bonds.push(Bond::new(k - 1, k, BondOrder::Aromatic));
                }
            }
            bonds.push(Bond::new(5, 0, BondOrder::Aromatic));
        }
        while atoms.len() < n {
            let e = *POOL.choose(rng).unwrap();
            if atoms.is_empty() {
                atoms.push(Atom::new(e));
                continue;
            }
            let sites: Vec<usize> = (0..atoms.len())
                .filter(|&i| {
                    let cap = if atoms[i].aromatic { 2 * 3 + 1 } else { 2 * valence(atoms[i].element) };
                    used(&atoms, &bonds, i) + 2 <= cap && !(atoms[i].aromatic && atoms[i].element == Element::N)
                })
                .collect();
            let Some(&site) = sites.choose(rng) else { break };
            atoms.push(Atom::new(e));
            bonds.push(Bond::new(site, atoms.len() - 1, BondOrder::Single));
        }
        // extra ring bonds and raised orders among non-aromatic atoms
        for _ in 0..rng.gen_range(0..3) {
            let (a, b) = (rng.gen_range(0..atoms.len()), rng.gen_range(0..atoms.len()));
            if a == b || atoms[a].aromatic || atoms[b].aromatic {
                continue;
            }
            let existing = bonds.iter().position(|bd| bd.endpoints() == (a.min(b), a.max(b)));
            if free(&atoms, &bonds, a) == 0 || free(&atoms, &bonds, b) == 0 {
                continue;
            }
            match existing {
                None => bonds.push(Bond::new(a, b, BondOrder::Single)),
                Some(k) => {
                    let raised = match bonds[k].order {
                        BondOrder::Single => BondOrder::Double,
                        BondOrder::Double => BondOrder::Triple,
                        _ => continue,
                    };
                    bonds[k] = Bond::new(a, b, raised);
                }
            }
        }
        if let Ok(g) = MolGraph::new(atoms, bonds) {
            return g;
        }
    }
}

fn atom_label(a: &Atom) -> (u8, bool, i8, u8) {
    (a.element.atomic_number(), a.aromatic, a.charge, a.explicit_h)
}

/// Backtracking search for a label- and bond-preserving bijection.
pub fn isomorphic(g: &MolGraph, h: &MolGraph) -> bool {
    let n = g.atom_count();
    if n != h.atom_count() || g.bond_count() != h.bond_count() {
        return false;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(g: &MolGraph, h: &MolGraph, k: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        let n = g.atom_count();
        if k == n {
            return true;
        }
        for cand in 0..n {
            if used[cand]
                || atom_label(g.atom(k)) != atom_label(h.atom(cand))
                || g.degree(k) != h.degree(cand)
            {
                continue;
            }
            let consistent = (0..k).all(|prev| g.bond_between(prev, k) == h.bond_between(map[prev], cand));
            if !consistent {
                continue;
            }
            map[k] = cand;
            used[cand] = true;
            if extend(g, h, k + 1, map, used) {
                return true;
            }
            used[cand] = false;
        }
        false
    }
    extend(g, h, 0, &mut map, &mut used)
}

fn bond_code(o: Option<BondOrder>) -> u8 {
    match o {
        None => 0,
        Some(BondOrder::Single) => 1,
        Some(BondOrder::Double) => 2,
        Some(BondOrder::Triple) => 3,
        Some(BondOrder::Aromatic) => 4,
    }
}

/// Lexicographically smallest labelling over all atom orders.
pub fn brute_canonical(g: &MolGraph) -> Vec<u16> {
    let n = g.atom_count();
    (0..n)
        .permutations(n)
        .map(|order| {
            let mut code: Vec<u16> = order
                .iter()
                .map(|&i| {
                    let (z, ar, c, h) = atom_label(g.atom(i));
                    (z as u16) << 8 | (ar as u16) << 7 | ((c + 8) as u16) << 3 | h as u16
                })
                .collect();
            for x in 0..n {
                for y in x + 1..n {
                    code.push(bond_code(g.bond_between(order[x], order[y])) as u16);
                }
            }
            code
        })
        .min()
        .expect("at least one atom")
}

/// Connected components by breadth-first search.
fn components(n: usize, bonds: &[Bond]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for b in bonds {
                let (x, y) = b.endpoints();
                let v = if x == u { y } else if y == u { x } else { continue };
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    q.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn keep_largest(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Option<MolGraph> {
    let comps = components(atoms.len(), &bonds);
    let mut best: Option<(usize, Certificate, MolGraph)> = None;
    for comp in comps {
        let index: Vec<Option<usize>> = (0..atoms.len()).map(|i| comp.iter().position(|&c| c == i)).collect();
        let sub_atoms = comp.iter().map(|&i| atoms[i]).collect();
        let sub_bonds = bonds
            .iter()
            .filter_map(|b| {
                let (x, y) = b.endpoints();
                Some(Bond::new(index[x]?, index[y]?, b.order))
            })
            .collect();
        let g = MolGraph::new(sub_atoms, sub_bonds).ok()?;
        let cert = canonical_certificate(&g);
        let better = match &best {
            None => true,
            Some((size, c, _)) => comp.len() > *size || (comp.len() == *size && cert < *c),
        };
        if better {
            best = Some((comp.len(), cert, g));
        }
    }
    best.map(|b| b.2)
}

/// Every add-atom, raise-bond and lower-bond edit, applied by rebuilding
/// atom and bond lists and checked with the neutral valence table.
pub fn naive_drug_results(g: &MolGraph, admissible: &[Element]) -> BTreeSet<Certificate> {
    let atoms: Vec<Atom> = g.atoms().to_vec();
    let bonds: Vec<Bond> = g.bonds().to_vec();
    let n = atoms.len();
    let cap = |a: &Atom| a.max_valence() * 2;
    let ok = |atoms: &[Atom], bonds: &[Bond]| (0..atoms.len()).all(|i| used(atoms, bonds, i) <= cap(&atoms[i]));
    let mut out = BTreeSet::new();
    for site in 0..n {
        for &e in admissible {
            let mut a2 = atoms.clone();
            a2.push(Atom::new(e));
            let mut b2 = bonds.clone();
            b2.push(Bond::new(site, n, BondOrder::Single));
            if ok(&a2, &b2) {
                if let Ok(r) = MolGraph::new(a2, b2) {
                    out.insert(canonical_certificate(&r));
                }
            }
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            let k = bonds.iter().position(|b| b.endpoints() == (x, y));
            let current = k.map(|k| bonds[k].order);
            let ups = match current {
                None => Some(BondOrder::Single),
                Some(BondOrder::Single) => Some(BondOrder::Double),
                Some(BondOrder::Double) => Some(BondOrder::Triple),
                _ => None,
            };
            let downs: Option<Option<BondOrder>> = match current {
                Some(BondOrder::Single) => Some(None),
                Some(BondOrder::Double) => Some(Some(BondOrder::Single)),
                Some(BondOrder::Triple) => Some(Some(BondOrder::Double)),
                _ => None,
            };
            for target in ups.map(Some).into_iter().chain(downs) {
                let mut b2: Vec<Bond> = bonds.iter().filter(|b| b.endpoints() != (x, y)).copied().collect();
                if let Some(o) = target {
                    b2.push(Bond::new(x, y, o));
                }
                if !ok(&atoms, &b2) {
                    continue;
                }
                if let Some(r) = keep_largest(atoms.clone(), b2) {
                    out.insert(canonical_certificate(&r));
                }
            }
        }
    }
    out
}

pub fn library_drug_results(g: &MolGraph, admissible: &[Element]) -> BTreeSet<Certificate> {
    enumerate_drug_actions(g, admissible)
        .into_iter()
        .map(|a| a.certificate)
        .collect()
}

/// Largest of `|num − ana| / max(|num|, |ana|)`, with entries where both are
/// below `floor` compared absolutely.
pub fn max_relative_error(numeric: &[f64], analytic: &[f64], floor: f64) -> f64 {
    numeric
        .iter()
        .zip(analytic)
        .map(|(n, a)| (n - a).abs() / n.abs().max(a.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Reference pair and oracle of the planted-interaction experiment.
pub struct PlantedFixture {
    pub drug: MolGraph,
    pub protein: ProteinSeq,
    pub oracle: Surrogate,
    pub interaction: PlantedInteraction,
}

pub const PLANTED_DRUG: &str = "CC(=O)NCO";
pub const PLANTED_PROTEIN: &str = "MLEICLKLVGCKSKKGLSSSSSCYLEEALQ";
pub const PLANTED_SEED: u64 = 7;

/// Plants an interaction of strength `eta` on a 3-residue window. The drug
/// bit is the one absent from the reference that the most single edits
/// create (ties: smallest weight); the window is the one whose alanine
/// mutations move the prediction least.
pub fn planted_fixture(eta: f64) -> PlantedFixture {
    let drug = parse_smiles(PLANTED_DRUG).unwrap();
    let protein = ProteinSeq::new(PLANTED_PROTEIN).unwrap();
    let base = Surrogate::new(SurrogateSpec::new(PLANTED_SEED)).unwrap();
    let fp0 = base.fingerprint(&drug);
    let results: Vec<_> = enumerate_drug_actions(&drug, &DEFAULT_ADMISSIBLE)
        .into_iter()
        .map(|a| base.fingerprint(&a.result))
        .collect();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for fp in &results {
        for b in fp.ones().filter(|&b| !fp0.get(b)) {
            if !candidates.iter().any(|c| c.1 == b) {
                candidates.push((results.iter().filter(|f| f.get(b)).count(), b));
            }
        }
    }
    let w = base.drug_weights();
    let bit = candidates
        .iter()
        .max_by(|x, y| x.0.cmp(&y.0).then(w[y.1].abs().total_cmp(&w[x.1].abs())))
        .unwrap()
        .1;
    let f0 = base.predict(&drug, &protein).unwrap();
    let effects: Vec<(usize, f64)> = enumerate_protein_actions(&protein)
        .iter()
        .map(|a| (a.position, (base.predict(&drug, &a.result).unwrap() - f0).abs()))
        .collect();
    let window_start = (0..protein.len() - 2)
        .min_by(|&s, &t| {
            let cost = |s: usize| -> f64 { effects.iter().filter(|e| (s..s + 3).contains(&e.0)).map(|e| e.1).sum() };
            cost(s).total_cmp(&cost(t))
        })
        .unwrap();
    let interaction = PlantedInteraction {
        bit,
        window_start,
        reference: PLANTED_PROTEIN[window_start..window_start + 3].to_string(),
        strength: eta,
    };
    let oracle = Surrogate::new(SurrogateSpec::new(PLANTED_SEED).with_interaction(interaction.clone())).unwrap();
    PlantedFixture {
        drug,
        protein,
        oracle,
        interaction,
    }
}
