//! A strict subset of SMILES.
//!
//! Supported: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I), aromatic
//! lowercase atoms (b, c, n, o, p, s), bonds `-`, `=`, `#`, `:`, branches,
//! ring closures `1`-`9` and `%nn`, and bracket atoms carrying an element,
//! an optional hydrogen count and an optional charge in [-2, 2].
//!
//! Rejected with a [`ParseError`]: stereo marks (`/`, `\`, `@`), isotopes,
//! the wildcard `*`, dot-separated fragments, atom classes and any element
//! outside the list above.

mod parser;
mod writer;

pub use parser::parse_smiles;
pub use writer::write_smiles;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unsupported {0}")]
    Unsupported(&'static str),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("malformed bracket atom")]
    BadBracket,
    #[error("unmatched '('")]
    UnclosedBranch,
    #[error("unmatched ')'")]
    UnopenedBranch,
    #[error("ring closure {0} never closed")]
    UnclosedRing(u32),
    #[error("ring closure bond orders disagree")]
    RingBondConflict,
    #[error("ring closure joins an atom to itself")]
    RingSelfLoop,
    #[error("bond symbol not followed by an atom")]
    DanglingBond,
    #[error("more than one bond between the same atoms")]
    DuplicateBond,
    #[error("branch or ring closure before any atom")]
    NoPreviousAtom,
    #[error("valence exceeded: uses {used}, maximum {max}")]
    Valence { used: u32, max: u32 },
    #[error("aromatic bond or atom is inconsistent")]
    Aromaticity,
}
