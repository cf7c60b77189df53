//! The two agents' discrete action spaces: one-step molecule edits and
//! single-point alanine substitutions.

use crate::molgraph::{canonical_certificate, Atom, BondOrder, Certificate, Element, MolGraph};
use crate::protein::{mutate_to_alanine, ProteinSeq, ENCODED_LENGTH};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_ADMISSIBLE: [Element; 4] = [Element::C, Element::N, Element::O, Element::F];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DrugEdit {
    /// New atom attached to `site` by a single bond.
    AddAtom { element: Element, site: usize },
    /// Raise the bond between two atoms by one order (creating it from none).
    AddBond { atoms: (usize, usize), to: BondOrder },
    /// Lower the bond between two atoms by one order (deleting it at zero).
    RemoveBond {
        atoms: (usize, usize),
        to: Option<BondOrder>,
    },
}

impl fmt::Display for DrugEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn order(o: Option<BondOrder>) -> u32 {
            o.and_then(BondOrder::integer).unwrap_or(0)
        }
        match *self {
            DrugEdit::AddAtom { element, site } => write!(f, "add {element} at {site}"),
            DrugEdit::AddBond { atoms: (a, b), to } => {
                write!(f, "bond {a}-{b} to order {}", order(Some(to)))
            }
            DrugEdit::RemoveBond { atoms: (a, b), to } => {
                write!(f, "bond {a}-{b} to order {}", order(to))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DrugAction {
    pub edit: DrugEdit,
    pub result: MolGraph,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProteinAction {
    pub position: usize,
    pub original: char,
    pub result: ProteinSeq,
    /// The position lies past the encoded window and is invisible to
    /// fixed-length observations.
    pub beyond_encoding: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("a joint action needs at least one real edit")]
    EmptyJointAction,
}

#[derive(Debug, Clone)]
pub struct JointAction {
    drug: Option<DrugAction>,
    protein: Option<ProteinAction>,
}

impl JointAction {
    pub fn new(
        drug: Option<DrugAction>,
        protein: Option<ProteinAction>,
    ) -> Result<Self, ActionError> {
        if drug.is_none() && protein.is_none() {
            return Err(ActionError::EmptyJointAction);
        }
        Ok(JointAction { drug, protein })
    }

    pub fn drug(&self) -> Option<&DrugAction> {
        self.drug.as_ref()
    }

    pub fn protein(&self) -> Option<&ProteinAction> {
        self.protein.as_ref()
    }
}

fn raise(order: Option<BondOrder>) -> Option<BondOrder> {
    match order {
        None => Some(BondOrder::Single),
        Some(BondOrder::Single) => Some(BondOrder::Double),
        Some(BondOrder::Double) => Some(BondOrder::Triple),
        _ => None,
    }
}

fn lower(order: BondOrder) -> Option<Option<BondOrder>> {
    match order {
        BondOrder::Single => Some(None),
        BondOrder::Double => Some(Some(BondOrder::Single)),
        BondOrder::Triple => Some(Some(BondOrder::Double)),
        BondOrder::Aromatic => None,
    }
}

/// Candidate edits before validation, in a fixed generation order.
fn candidate_edits(g: &MolGraph, admissible: &[Element]) -> Vec<DrugEdit> {
    let n = g.atom_count();
    let mut edits = Vec::new();
    for site in 0..n {
        if g.free_valence(site) >= 1 {
            edits.extend(
                admissible
                    .iter()
                    .map(|&element| DrugEdit::AddAtom { element, site }),
            );
        }
    }
    for a in 0..n {
        if g.free_valence(a) == 0 {
            continue;
        }
        for b in a + 1..n {
            if g.free_valence(b) == 0 {
                continue;
            }
            if let Some(to) = raise(g.bond_between(a, b)) {
                if g.bond_between(a, b) == Some(BondOrder::Aromatic) {
                    continue;
                }
                edits.push(DrugEdit::AddBond { atoms: (a, b), to });
            }
        }
    }
    for bond in g.bonds() {
        if let Some(to) = lower(bond.order) {
            edits.push(DrugEdit::RemoveBond {
                atoms: bond.endpoints(),
                to,
            });
        }
    }
    edits
}

/// Applies an edit, returning `None` when the result breaks a graph invariant.
pub fn apply_drug_edit(g: &MolGraph, edit: &DrugEdit) -> Option<MolGraph> {
    match *edit {
        DrugEdit::AddAtom { element, site } => g
            .with_added_atom(site, Atom::new(element), BondOrder::Single)
            .ok(),
        DrugEdit::AddBond { atoms: (a, b), to } => g.with_bond(a, b, Some(to)).ok(),
        DrugEdit::RemoveBond { atoms: (a, b), to } => g.with_bond(a, b, to).ok(),
    }
}

/// Every valid one-step edit of `g`, deduplicated by canonical certificate
/// and sorted by it.
pub fn enumerate_drug_actions(g: &MolGraph, admissible: &[Element]) -> Vec<DrugAction> {
    let edits = candidate_edits(g, admissible);
    let results: Vec<Option<DrugAction>> = edits
        .par_iter()
        .map(|edit| {
            apply_drug_edit(g, edit).map(|result| DrugAction {
                edit: *edit,
                certificate: canonical_certificate(&result),
                result,
            })
        })
        .collect();
    let mut seen = HashSet::new();
    let mut actions: Vec<DrugAction> = results
        .into_iter()
        .flatten()
        .filter(|a| seen.insert(a.certificate.clone()))
        .collect();
    actions.sort_by(|x, y| x.certificate.cmp(&y.certificate));
    actions
}

/// One alanine substitution per non-alanine position, in position order.
pub fn enumerate_protein_actions(p: &ProteinSeq) -> Vec<ProteinAction> {
    (0..p.len())
        .filter_map(|position| {
            mutate_to_alanine(p, position)
                .ok()
                .map(|result| ProteinAction {
                    position,
                    original: p.residue(position).expect("in range"),
                    result,
                    beyond_encoding: position >= ENCODED_LENGTH,
                })
        })
        .collect()
}
