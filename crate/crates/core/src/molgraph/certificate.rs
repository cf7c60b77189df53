//! Canonical certificates by color refinement plus individualization.
//!
//! Atoms start colored by their label, colors are refined to the coarsest
//! equitable partition, and remaining ties are broken by individualizing each
//! member of the first non-singleton cell in turn. The lexicographically
//! smallest certificate over all discrete leaves wins. Members of a cell that
//! are twins (identical neighborhoods) lead to identical subtrees, so only one
//! of them is explored.

use super::MolGraph;
use std::cmp::Ordering;

/// Byte string equal for two graphs exactly when they are isomorphic with
/// matching atom and bond attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate(Vec<u8>);

impl Certificate {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn canonical_certificate(g: &MolGraph) -> Certificate {
    canonical_form(g).0
}

/// `rank[i]` is the canonical position of atom `i`.
pub fn canonical_ranking(g: &MolGraph) -> Vec<usize> {
    canonical_form(g).1
}

fn canonical_form(g: &MolGraph) -> (Certificate, Vec<usize>) {
    let colors = initial_colors(g);
    let mut best: Option<(Vec<u8>, Vec<u32>)> = None;
    search(g, colors, &mut best);
    let (bytes, colors) = best.expect("search always reaches a leaf");
    (
        Certificate(bytes),
        colors.into_iter().map(|c| c as usize).collect(),
    )
}

fn atom_label(g: &MolGraph, i: usize) -> [u8; 4] {
    let a = g.atom(i);
    [
        a.element.atomic_number(),
        u8::from(a.aromatic),
        a.charge as u8,
        a.explicit_h,
    ]
}

/// Colors are ranks: the number of atoms with a strictly smaller key.
fn rank_by<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0u32; keys.len()];
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && keys[order[pos - 1]] == keys[i] {
            colors[i] = colors[order[pos - 1]];
        } else {
            colors[i] = pos as u32;
        }
    }
    colors
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn initial_colors(g: &MolGraph) -> Vec<u32> {
    let labels: Vec<[u8; 4]> = (0..g.atom_count()).map(|i| atom_label(g, i)).collect();
    rank_by(&labels)
}

fn refine(g: &MolGraph, colors: &mut Vec<u32>) {
    let n = g.atom_count();
    let mut cells = distinct(colors);
    loop {
        if cells == n {
            return;
        }
        let sigs: Vec<(u32, Vec<(u8, u32)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u8, u32)> =
                    g.neighbors(i).map(|(j, o)| (o.code(), colors[j])).collect();
                nb.sort_unstable();
                (colors[i], nb)
            })
            .collect();
        let next = rank_by(&sigs);
        let next_cells = distinct(&next);
        *colors = next;
        if next_cells == cells {
            return;
        }
        cells = next_cells;
    }
}

fn leaf_bytes(g: &MolGraph, colors: &[u32]) -> Vec<u8> {
    let n = g.atom_count();
    let mut by_rank = vec![0usize; n];
    for (i, &c) in colors.iter().enumerate() {
        by_rank[c as usize] = i;
    }
    let mut out = Vec::with_capacity(8 + 4 * n + 5 * g.bond_count());
    out.extend_from_slice(&(n as u32).to_be_bytes());
    for &i in &by_rank {
        out.extend_from_slice(&atom_label(g, i));
    }
    let mut edges: Vec<(u32, u32, u8)> = g
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = b.endpoints();
            let (cx, cy) = (colors[x], colors[y]);
            (cx.min(cy), cx.max(cy), b.order.code())
        })
        .collect();
    edges.sort_unstable();
    out.extend_from_slice(&(edges.len() as u32).to_be_bytes());
    for (x, y, o) in edges {
        out.extend_from_slice(&x.to_be_bytes());
        out.extend_from_slice(&y.to_be_bytes());
        out.push(o);
    }
    out
}

fn are_twins(g: &MolGraph, u: usize, v: usize) -> bool {
    let mut nu: Vec<(usize, u8)> = g
        .neighbors(u)
        .filter(|&(j, _)| j != v)
        .map(|(j, o)| (j, o.code()))
        .collect();
    let mut nv: Vec<(usize, u8)> = g
        .neighbors(v)
        .filter(|&(j, _)| j != u)
        .map(|(j, o)| (j, o.code()))
        .collect();
    nu.sort_unstable();
    nv.sort_unstable();
    nu == nv
}

fn search(g: &MolGraph, mut colors: Vec<u32>, best: &mut Option<(Vec<u8>, Vec<u32>)>) {
    refine(g, &mut colors);
    let n = g.atom_count();
    let mut counts = vec![0usize; n];
    for &c in &colors {
        counts[c as usize] += 1;
    }
    let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
        let bytes = leaf_bytes(g, &colors);
        let replace = match best {
            None => true,
            Some((b, _)) => bytes.cmp(b) == Ordering::Less,
        };
        if replace {
            *best = Some((bytes, colors));
        }
        return;
    };
    let target = target as u32;
    let cell: Vec<usize> = (0..n).filter(|&i| colors[i] == target).collect();
    let mut representatives: Vec<usize> = Vec::new();
    for &v in &cell {
        if !representatives.iter().any(|&r| are_twins(g, r, v)) {
            representatives.push(v);
        }
    }
    for v in representatives {
        let mut child = colors.clone();
        for &u in &cell {
            if u != v {
                child[u] = target + 1;
            }
        }
        search(g, child, best);
    }
}
