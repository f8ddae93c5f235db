//! Molecular graphs, SMILES reading and writing, canonical labelling,
//! kekulization and resonance enumeration.

mod canon;
mod element;
mod kekule;
mod mol;
mod smiles;
mod writer;

use thiserror::Error;

pub use canon::{canonical_ranks, canonical_smiles, canonical_smiles_of_perceived};
pub use element::Element;
pub use kekule::{
    enumerate_resonance, kekulize, perceive_aromaticity, ResonanceSet, DEFAULT_RESONANCE_LIMIT,
};
pub use mol::{Atom, Bond, BondOrder, MolGraph};
pub use smiles::{parse_smiles, parse_smiles_with_warnings, read_smiles_lines, ParseWarning};
pub use writer::{write_smiles, HydrogenStyle, WrittenSmiles};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error("empty SMILES")]
    Empty,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unclosed ring bond {0}")]
    UnclosedRing(u32),
    #[error("unsupported element '{symbol}' at position {pos}")]
    UnsupportedElement { symbol: String, pos: usize },
    #[error("multi-fragment SMILES ('.') are not supported")]
    MultiFragment,
    #[error("valence violation on atom {atom} ({element})")]
    Valence { atom: usize, element: Element },
    #[error("kekulization failed: no alternating assignment covers atoms {atoms:?}")]
    Kekulization { atoms: Vec<usize> },
    #[error("atom index {0} out of range")]
    AtomIndex(usize),
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("atoms {0} and {1} are already bonded")]
    DuplicateBond(usize, usize),
}

/// Canonical SMILES of the molecule written by `smiles`.
pub fn canonical_from_smiles(smiles: &str) -> Result<String, ChemError> {
    canonical_smiles(&parse_smiles(smiles)?)
}
