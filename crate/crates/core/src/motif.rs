//! Motif decomposition: every acyclic single bond is cut; the connected
//! pieces that remain (ring systems with their multiply-bonded
//! substituents, chain fragments held together by double or triple bonds,
//! and isolated atoms) are the motifs.

use crate::chem::{canonical_smiles, kekulize, BondOrder, ChemError, MolGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    /// Fragment as a standalone molecule in Kekulé form, with implicit
    /// hydrogens.
    pub graph: MolGraph,
    pub canonical: String,
    /// Parent atom index of each fragment atom.
    pub atom_map: Vec<usize>,
}

impl Motif {
    pub fn atom_count(&self) -> usize {
        self.atom_map.len()
    }
}

/// Motifs plus the bonds that were cut to obtain them.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Kekulé form of the parent the motifs index into.
    pub parent: MolGraph,
    pub motifs: Vec<Motif>,
    /// Parent bond indices removed by the decomposition.
    pub cut_bonds: Vec<usize>,
    /// Motif index of every parent atom.
    pub motif_of_atom: Vec<usize>,
}

fn is_cut(mol: &MolGraph, bond: usize) -> bool {
    mol.bond(bond).order == BondOrder::Single && !mol.is_ring_bond(bond)
}

/// Splits `mol` into motifs, ordered by their smallest parent atom index.
pub fn decompose(mol: &MolGraph) -> Result<Vec<Motif>, ChemError> {
    Ok(decompose_with_cuts(mol)?.motifs)
}

pub fn decompose_with_cuts(mol: &MolGraph) -> Result<Decomposition, ChemError> {
    let parent = kekulize(mol)?;
    let n = parent.atom_count();
    let mut motif_of_atom = vec![usize::MAX; n];
    let mut motifs = Vec::new();
    for start in 0..n {
        if motif_of_atom[start] != usize::MAX {
            continue;
        }
        let id = motifs.len();
        let mut atoms = vec![start];
        motif_of_atom[start] = id;
        let mut head = 0;
        while head < atoms.len() {
            let u = atoms[head];
            head += 1;
            for &(v, b) in parent.neighbors(u) {
                if !is_cut(&parent, b) && motif_of_atom[v] == usize::MAX {
                    motif_of_atom[v] = id;
                    atoms.push(v);
                }
            }
        }
        atoms.sort_unstable();
        let mut graph = parent.subgraph(&atoms);
        graph.clear_explicit_hydrogens();
        let canonical = canonical_smiles(&graph)?;
        motifs.push(Motif {
            graph,
            canonical,
            atom_map: atoms,
        });
    }
    let cut_bonds = (0..parent.bond_count()).filter(|&b| is_cut(&parent, b)).collect();
    Ok(Decomposition {
        parent,
        motifs,
        cut_bonds,
        motif_of_atom,
    })
}
