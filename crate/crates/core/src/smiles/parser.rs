use super::{ParseError, ParseErrorKind};
use crate::molgraph::{Atom, Bond, BondOrder, Element, GraphError, MolGraph};
use std::collections::BTreeMap;

struct RingOpen {
    atom: usize,
    order: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_offsets: Vec<usize>,
    bonds: Vec<Bond>,
    bond_offsets: Vec<usize>,
    prev: Option<usize>,
    branches: Vec<(Option<usize>, usize)>,
    pending: Option<(BondOrder, usize)>,
    rings: BTreeMap<u32, RingOpen>,
}

fn err(offset: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { offset, kind }
}

/// Parses a subset-SMILES string. Every input yields a graph or a
/// [`ParseError`] carrying the byte offset of the problem.
pub fn parse_smiles(s: &str) -> Result<MolGraph, ParseError> {
    if s.is_empty() {
        return Err(err(0, ParseErrorKind::Empty));
    }
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_offsets: Vec::new(),
        bonds: Vec::new(),
        bond_offsets: Vec::new(),
        prev: None,
        branches: Vec::new(),
        pending: None,
        rings: BTreeMap::new(),
    };
    p.run()?;
    p.finish()
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => {
                    let two = self.src.get(self.pos + 1).copied();
                    let element = match (c, two) {
                        (b'B', Some(b'r')) => {
                            self.pos += 1;
                            Element::Br
                        }
                        (b'C', Some(b'l')) => {
                            self.pos += 1;
                            Element::Cl
                        }
                        _ => Element::from_symbol(&(c as char).to_string())
                            .expect("organic subset letter"),
                    };
                    self.pos += 1;
                    self.add_atom(Atom::new(element), start)?;
                }
                b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                    let element = Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string())
                        .expect("aromatic subset letter");
                    self.pos += 1;
                    self.add_atom(Atom::aromatic(element), start)?;
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, start)?;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if self.pending.is_some() {
                        return Err(err(start, ParseErrorKind::UnexpectedChar(c as char)));
                    }
                    let order = match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    };
                    self.pending = Some((order, start));
                    self.pos += 1;
                }
                b'(' => {
                    if self.prev.is_none() {
                        return Err(err(start, ParseErrorKind::NoPreviousAtom));
                    }
                    if self.pending.is_some() {
                        return Err(err(start, ParseErrorKind::DanglingBond));
                    }
                    self.branches.push((self.prev, start));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return Err(err(start, ParseErrorKind::DanglingBond));
                    }
                    let Some((atom, _)) = self.branches.pop() else {
                        return Err(err(start, ParseErrorKind::UnopenedBranch));
                    };
                    self.prev = atom;
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.ring_bond(u32::from(c - b'0'), start)?;
                }
                b'%' => {
                    let d1 = self.src.get(self.pos + 1).copied();
                    let d2 = self.src.get(self.pos + 2).copied();
                    match (d1, d2) {
                        (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                            self.pos += 3;
                            let digit = u32::from(a - b'0') * 10 + u32::from(b - b'0');
                            self.ring_bond(digit, start)?;
                        }
                        _ => return Err(err(start, ParseErrorKind::UnexpectedChar('%'))),
                    }
                }
                b'/' | b'\\' | b'@' => {
                    return Err(err(start, ParseErrorKind::Unsupported("stereochemistry")))
                }
                b'*' => return Err(err(start, ParseErrorKind::Unsupported("wildcard atom"))),
                b'.' => {
                    return Err(err(
                        start,
                        ParseErrorKind::Unsupported("disconnected fragments"),
                    ))
                }
                _ => {
                    let ch = std::str::from_utf8(&self.src[start..])
                        .ok()
                        .and_then(|s| s.chars().next())
                        .unwrap_or(char::REPLACEMENT_CHARACTER);
                    return Err(err(start, ParseErrorKind::UnexpectedChar(ch)));
                }
            }
        }
        Ok(())
    }

    fn bracket_atom(&mut self) -> Result<Atom, ParseError> {
        let open = self.pos;
        self.pos += 1;
        if matches!(self.peek(), Some(b'0'..=b'9')) {
            return Err(err(self.pos, ParseErrorKind::Unsupported("isotope")));
        }
        if self.peek() == Some(b'*') {
            return Err(err(self.pos, ParseErrorKind::Unsupported("wildcard atom")));
        }
        let sym_start = self.pos;
        let Some(first) = self.peek() else {
            return Err(err(open, ParseErrorKind::BadBracket));
        };
        let mut atom = if first.is_ascii_uppercase() {
            self.pos += 1;
            let mut symbol = (first as char).to_string();
            if let Some(second) = self.peek().filter(u8::is_ascii_lowercase) {
                symbol.push(second as char);
                self.pos += 1;
            }
            let element = Element::from_symbol(&symbol)
                .ok_or_else(|| err(sym_start, ParseErrorKind::UnknownElement(symbol.clone())))?;
            Atom::new(element)
        } else if first.is_ascii_lowercase() {
            self.pos += 1;
            if matches!(self.peek(), Some(b'a'..=b'z')) {
                let sym = format!("{}{}", first as char, self.peek().unwrap() as char);
                return Err(err(sym_start, ParseErrorKind::UnknownElement(sym)));
            }
            let element = Element::from_symbol(&(first.to_ascii_uppercase() as char).to_string())
                .filter(|e| e.can_be_aromatic())
                .ok_or_else(|| {
                    err(
                        sym_start,
                        ParseErrorKind::UnknownElement((first as char).to_string()),
                    )
                })?;
            Atom::aromatic(element)
        } else {
            return Err(err(sym_start, ParseErrorKind::BadBracket));
        };
        if self.peek() == Some(b'@') {
            return Err(err(self.pos, ParseErrorKind::Unsupported("stereochemistry")));
        }
        if self.peek() == Some(b'H') {
            self.pos += 1;
            atom.explicit_h = match self.peek() {
                Some(d @ b'0'..=b'9') => {
                    self.pos += 1;
                    d - b'0'
                }
                _ => 1,
            };
        }
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let charge_at = self.pos;
            self.pos += 1;
            let unit: i8 = if sign == b'+' { 1 } else { -1 };
            let mut charge = unit;
            match self.peek() {
                Some(d @ b'0'..=b'9') => {
                    self.pos += 1;
                    charge = unit * (d - b'0') as i8;
                }
                Some(s) if s == sign => {
                    self.pos += 1;
                    charge = unit * 2;
                }
                _ => {}
            }
            if !(-2..=2).contains(&charge) {
                return Err(err(charge_at, ParseErrorKind::Unsupported("charge beyond ±2")));
            }
            atom.charge = charge;
        }
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok(atom)
            }
            Some(b':') => Err(err(self.pos, ParseErrorKind::Unsupported("atom class"))),
            Some(b'@') => Err(err(self.pos, ParseErrorKind::Unsupported("stereochemistry"))),
            _ => Err(err(open, ParseErrorKind::BadBracket)),
        }
    }

    fn implicit_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn push_bond(&mut self, a: usize, b: usize, order: BondOrder, offset: usize) -> Result<(), ParseError> {
        let key = (a.min(b), a.max(b));
        if self.bonds.iter().any(|bd| bd.endpoints() == key) {
            return Err(err(offset, ParseErrorKind::DuplicateBond));
        }
        self.bonds.push(Bond::new(a, b, order));
        self.bond_offsets.push(offset);
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, offset: usize) -> Result<(), ParseError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        self.atom_offsets.push(offset);
        let pending = self.pending.take();
        match self.prev {
            Some(prev) => {
                let (order, at) = match pending {
                    Some((o, at)) => (o, at),
                    None => (self.implicit_order(prev, idx), offset),
                };
                self.push_bond(prev, idx, order, at)?;
            }
            None => {
                if idx > 0 {
                    // only reachable after a branch reset, which always has an atom
                    return Err(err(offset, ParseErrorKind::NoPreviousAtom));
                }
                if let Some((_, at)) = pending {
                    return Err(err(at, ParseErrorKind::NoPreviousAtom));
                }
            }
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_bond(&mut self, digit: u32, offset: usize) -> Result<(), ParseError> {
        let Some(atom) = self.prev else {
            return Err(err(offset, ParseErrorKind::NoPreviousAtom));
        };
        let order = self.pending.take().map(|(o, _)| o);
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(digit, RingOpen { atom, order, offset });
                Ok(())
            }
            Some(open) => {
                if open.atom == atom {
                    return Err(err(offset, ParseErrorKind::RingSelfLoop));
                }
                let order = match (open.order, order) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(err(offset, ParseErrorKind::RingBondConflict))
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.implicit_order(open.atom, atom),
                };
                self.push_bond(open.atom, atom, order, offset)
            }
        }
    }

    fn finish(self) -> Result<MolGraph, ParseError> {
        if let Some((_, at)) = self.pending {
            return Err(err(at, ParseErrorKind::DanglingBond));
        }
        if let Some(&(_, at)) = self.branches.last() {
            return Err(err(at, ParseErrorKind::UnclosedBranch));
        }
        if let Some((&digit, open)) = self.rings.iter().next() {
            return Err(err(open.offset, ParseErrorKind::UnclosedRing(digit)));
        }
        if self.atoms.is_empty() {
            return Err(err(0, ParseErrorKind::Empty));
        }
        let atom_offsets = self.atom_offsets;
        let bond_offsets = self.bond_offsets;
        let bonds = self.bonds.clone();
        MolGraph::new(self.atoms, self.bonds).map_err(|e| match e {
            GraphError::Valence { atom, used, max } => {
                err(atom_offsets[atom], ParseErrorKind::Valence { used, max })
            }
            GraphError::AromaticBond(a, b) => {
                let at = bonds
                    .iter()
                    .position(|bd| bd.endpoints() == (a, b))
                    .map_or(0, |k| bond_offsets[k]);
                err(at, ParseErrorKind::Aromaticity)
            }
            GraphError::AromaticElement(_) => err(0, ParseErrorKind::Aromaticity),
            GraphError::DuplicateBond(..) => err(0, ParseErrorKind::DuplicateBond),
            other => unreachable!("parser produced structurally invalid graph: {other}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_chains_and_rings() {
        let ethane = parse_smiles("CC").unwrap();
        assert_eq!((ethane.atom_count(), ethane.bond_count()), (2, 1));
        assert_eq!(ethane.bonds()[0].order, BondOrder::Single);

        let cyclopropane = parse_smiles("C1CC1").unwrap();
        assert_eq!((cyclopropane.atom_count(), cyclopropane.bond_count()), (3, 3));

        let benzene = parse_smiles("c1ccccc1").unwrap();
        assert_eq!((benzene.atom_count(), benzene.bond_count()), (6, 6));
        assert!(benzene.atoms().iter().all(|a| a.aromatic));
        assert!(benzene.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert!((0..6).all(|i| benzene.free_valence(i) == 1));
    }

    #[test]
    fn branches_and_two_letter_elements() {
        let g = parse_smiles("CC(Cl)(Br)C(=O)O").unwrap();
        assert_eq!(g.atom_count(), 7);
        let elements: Vec<_> = g.atoms().iter().map(|a| a.element).collect();
        assert!(elements.contains(&Element::Cl) && elements.contains(&Element::Br));
        assert_eq!(g.bond_between(4, 5), Some(BondOrder::Double));
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("C[N+](C)(C)C").unwrap();
        assert_eq!(g.atom(1).charge, 1);
        let pyrrole = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(pyrrole.atom(3).explicit_h, 1);
        assert_eq!(pyrrole.free_valence(3), 0);
        let acetate = parse_smiles("CC(=O)[O-]").unwrap();
        assert_eq!(acetate.atom(3).charge, -1);
        assert_eq!(acetate.free_valence(3), 0);
    }

    #[test]
    fn ring_bond_orders() {
        assert_eq!(
            parse_smiles("C=1CC1").unwrap().bond_between(0, 2),
            Some(BondOrder::Double)
        );
        assert!(parse_smiles("C=1CC=1").is_ok());
        assert_eq!(
            parse_smiles("C=1CC#1").unwrap_err().kind,
            ParseErrorKind::RingBondConflict
        );
        let big = parse_smiles("C%12CCC%12").unwrap();
        assert_eq!(big.bond_count(), 4);
    }

    #[test]
    fn structured_errors_with_offsets() {
        let cases: &[(&str, usize)] = &[
            ("C/C=C/C", 1),
            ("C[C@H](O)N", 3),
            ("C*", 1),
            ("CC.O", 2),
            ("[13C]", 1),
            ("C(C", 1),
            ("CC)", 2),
            ("C1CC", 1),
            ("C=", 1),
            ("FC(F)(F)(F)F", 1),
            ("[Na+]", 1),
            ("CxC", 1),
            ("", 0),
            ("C11", 2),
            ("C1C1", 3),
        ];
        for &(s, offset) in cases {
            let e = parse_smiles(s).unwrap_err();
            assert_eq!(e.offset, offset, "{s}: {e}");
        }
    }

    #[test]
    fn non_ascii_is_rejected() {
        let e = parse_smiles("Cé").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('é'));
    }
}
