use crate::molgraph::{canonical_ranking, Atom, BondOrder, MolGraph};
use std::fmt::Write;

/// Writes a subset-SMILES string.
///
/// Traversal is depth-first from the atom with canonical rank 0, visiting
/// neighbors in rank order, so isomorphic graphs produce identical strings.
pub fn write_smiles(g: &MolGraph) -> String {
    let rank = canonical_ranking(g);
    let n = g.atom_count();
    let root = (0..n).min_by_key(|&i| rank[i]).unwrap_or(0);

    let mut sorted_nbrs: Vec<Vec<(usize, BondOrder)>> = (0..n)
        .map(|i| g.neighbors(i).collect())
        .collect();
    for nb in &mut sorted_nbrs {
        nb.sort_by_key(|&(j, _)| rank[j]);
    }

    // First pass: spanning tree, discovery order and ring-closure bonds.
    let mut order = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closures: Vec<(usize, usize, BondOrder)> = Vec::new();
    let mut counter = 0;
    let mut stack = vec![(root, usize::MAX, 0usize)];
    order[root] = counter;
    counter += 1;
    while let Some(top) = stack.last_mut() {
        let (u, from, slot) = (top.0, top.1, top.2);
        if slot >= sorted_nbrs[u].len() {
            stack.pop();
            continue;
        }
        top.2 += 1;
        let (v, o) = sorted_nbrs[u][slot];
        if v == from {
            continue;
        }
        if order[v] == usize::MAX {
            order[v] = counter;
            counter += 1;
            parent[v] = u;
            children[u].push(v);
            stack.push((v, u, 0));
        } else if order[v] < order[u] && parent[u] != v {
            closures.push((v, u, o));
        }
    }

    // Ring bonds per atom: (partner, order, opens_here)
    let mut ring_at: Vec<Vec<(usize, BondOrder, bool)>> = vec![Vec::new(); n];
    for &(open, close, o) in &closures {
        ring_at[open].push((close, o, true));
        ring_at[close].push((open, o, false));
    }
    for list in &mut ring_at {
        // closings first so their digits can be reused by openings
        list.sort_by_key(|&(partner, _, opens)| (opens, order[partner]));
    }

    let mut out = String::new();
    let mut digits: Vec<Option<(usize, usize)>> = Vec::new(); // slot -> (opener, closer)
    emit(
        g,
        root,
        None,
        &children,
        &ring_at,
        &mut digits,
        &mut out,
    );
    out
}

fn bond_symbol(g: &MolGraph, a: usize, b: usize, order: BondOrder) -> &'static str {
    let both_aromatic = g.atom(a).aromatic && g.atom(b).aromatic;
    match order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn atom_symbol(atom: &Atom, out: &mut String) {
    let symbol = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    if atom.charge == 0 && atom.explicit_h == 0 {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    out.push_str(&symbol);
    match atom.explicit_h {
        0 => {}
        1 => out.push('H'),
        h => {
            let _ = write!(out, "H{h}");
        }
    }
    match atom.charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => {
            let _ = write!(out, "+{q}");
        }
        q => {
            let _ = write!(out, "-{}", -q);
        }
    }
    out.push(']');
}

fn push_digit(slot: usize, out: &mut String) {
    let d = slot + 1;
    if d < 10 {
        let _ = write!(out, "{d}");
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

fn emit(
    g: &MolGraph,
    u: usize,
    parent: Option<usize>,
    children: &[Vec<usize>],
    ring_at: &[Vec<(usize, BondOrder, bool)>],
    digits: &mut Vec<Option<(usize, usize)>>,
    out: &mut String,
) {
    if let Some(p) = parent {
        let order = g.bond_between(p, u).expect("tree edge");
        out.push_str(bond_symbol(g, p, u, order));
    }
    atom_symbol(g.atom(u), out);
    for &(partner, order, opens) in &ring_at[u] {
        if opens {
            let slot = match digits.iter().position(Option::is_none) {
                Some(s) => s,
                None => {
                    digits.push(None);
                    digits.len() - 1
                }
            };
            digits[slot] = Some((u, partner));
            out.push_str(bond_symbol(g, u, partner, order));
            push_digit(slot, out);
        } else {
            let slot = digits
                .iter()
                .position(|d| *d == Some((partner, u)))
                .expect("ring opened before closing");
            digits[slot] = None;
            push_digit(slot, out);
        }
    }
    let kids = &children[u];
    for (k, &child) in kids.iter().enumerate() {
        let last = k + 1 == kids.len();
        if !last {
            out.push('(');
        }
        emit(g, child, Some(u), children, ring_at, digits, out);
        if !last {
            out.push(')');
        }
    }
}
