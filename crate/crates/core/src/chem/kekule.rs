use std::collections::VecDeque;

use super::mol::{BondOrder, MolGraph};
use super::ChemError;

pub const DEFAULT_RESONANCE_LIMIT: usize = 64;

/// Kekulé structures of one molecule, all sharing the source atom order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonanceSet {
    pub structures: Vec<MolGraph>,
    /// Set when enumeration stopped at the limit.
    pub truncated: bool,
}

impl ResonanceSet {
    pub fn first(&self) -> &MolGraph {
        &self.structures[0]
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }
}

/// Atoms that must carry a double bond and the aromatic bonds that may
/// hold one.
struct PiSystem {
    nodes: Vec<usize>,
    /// For each node position, `(neighbor position, bond index)`.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PiSystem {
    fn of(mol: &MolGraph) -> PiSystem {
        let mut position = vec![usize::MAX; mol.atom_count()];
        let mut nodes = Vec::new();
        for (i, pos) in position.iter_mut().enumerate() {
            if mol.needs_pi_bond(i) {
                *pos = nodes.len();
                nodes.push(i);
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (idx, bond) in mol.bonds().iter().enumerate() {
            if bond.order != BondOrder::Aromatic {
                continue;
            }
            let (pa, pb) = (position[bond.a], position[bond.b]);
            if pa != usize::MAX && pb != usize::MAX {
                adjacency[pa].push((pb, idx));
                adjacency[pb].push((pa, idx));
            }
        }
        PiSystem { nodes, adjacency }
    }

    /// Enumerates perfect matchings, branching on the lowest unmatched
    /// node so every matching is produced exactly once. Stops after
    /// `limit` results; the flag reports whether more exist.
    fn matchings(&self, limit: usize) -> (Vec<Vec<usize>>, bool) {
        let mut mate = vec![usize::MAX; self.nodes.len()];
        let mut chosen = Vec::new();
        let mut out = Vec::new();
        let mut truncated = false;
        self.search(&mut mate, &mut chosen, &mut out, limit, &mut truncated);
        (out, truncated)
    }

    fn search(
        &self,
        mate: &mut [usize],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        // dead end: an unmatched node with no free partner
        for u in 0..mate.len() {
            if mate[u] == usize::MAX && !self.adjacency[u].iter().any(|&(v, _)| mate[v] == usize::MAX) {
                return;
            }
        }
        let Some(u) = mate.iter().position(|&m| m == usize::MAX) else {
            if out.len() == limit {
                *truncated = true;
            } else {
                out.push(chosen.clone());
            }
            return;
        };
        for &(v, bond) in &self.adjacency[u] {
            if mate[v] != usize::MAX {
                continue;
            }
            mate[u] = v;
            mate[v] = u;
            chosen.push(bond);
            self.search(mate, chosen, out, limit, truncated);
            chosen.pop();
            mate[u] = usize::MAX;
            mate[v] = usize::MAX;
            if *truncated {
                return;
            }
        }
    }
}

fn assign(mol: &MolGraph, doubles: &[usize]) -> MolGraph {
    let mut out = mol.clone();
    for idx in 0..out.bond_count() {
        if out.bond(idx).order == BondOrder::Aromatic {
            out.set_bond_order(idx, BondOrder::Single);
        }
    }
    for &idx in doubles {
        out.set_bond_order(idx, BondOrder::Double);
    }
    for i in 0..out.atom_count() {
        out.atom_mut(i).aromatic = false;
    }
    out
}

/// Replaces aromatic annotations by an explicit single/double assignment.
/// Inputs without aromatic atoms or bonds are returned unchanged.
pub fn kekulize(mol: &MolGraph) -> Result<MolGraph, ChemError> {
    Ok(enumerate_resonance(mol, 1)?.structures.swap_remove(0))
}

/// All distinct Kekulé assignments of the aromatic systems, up to `limit`.
/// The first structure is the one [`kekulize`] returns.
pub fn enumerate_resonance(mol: &MolGraph, limit: usize) -> Result<ResonanceSet, ChemError> {
    let limit = limit.max(1);
    if !mol.has_aromatic() {
        return Ok(ResonanceSet {
            structures: vec![mol.clone()],
            truncated: false,
        });
    }
    let system = PiSystem::of(mol);
    let (matchings, truncated) = system.matchings(limit);
    if matchings.is_empty() {
        return Err(ChemError::Kekulization { atoms: system.nodes });
    }
    Ok(ResonanceSet {
        structures: matchings.iter().map(|m| assign(mol, m)).collect(),
        truncated,
    })
}

/// Resonance-variable atoms and bonds of a Kekulé structure: bonds that are
/// double in some Kekulé structure of the molecule and single in another.
///
/// The result does not depend on which Kekulé structure is supplied: these
/// are the edges of the conjugated subgraph that belong to some but not all
/// perfect matchings, found as edges on alternating cycles of the current
/// matching.
pub(crate) fn variable_bonds(mol: &MolGraph) -> (Vec<bool>, Vec<bool>) {
    let n = mol.atom_count();
    let double_count = |i: usize| {
        mol.neighbors(i)
            .iter()
            .filter(|&&(_, b)| mol.bond(b).order == BondOrder::Double)
            .count()
    };
    let has_triple = |i: usize| {
        mol.neighbors(i)
            .iter()
            .any(|&(_, b)| mol.bond(b).order == BondOrder::Triple)
    };
    // conjugated atoms: exactly one double bond, no triple bond
    let conjugated: Vec<bool> = (0..n).map(|i| double_count(i) == 1 && !has_triple(i)).collect();
    let mut mate = vec![usize::MAX; n];
    for bond in mol.bonds() {
        if bond.order == BondOrder::Double && conjugated[bond.a] && conjugated[bond.b] {
            mate[bond.a] = bond.b;
            mate[bond.b] = bond.a;
        }
    }
    let in_system = |i: usize| mate[i] != usize::MAX;
    let conjugated_edge = |bond: usize| {
        let b = mol.bond(bond);
        matches!(b.order, BondOrder::Single | BondOrder::Double) && in_system(b.a) && in_system(b.b)
    };
    let mut bond_marks = vec![false; mol.bond_count()];
    for (idx, bond) in mol.bonds().iter().enumerate() {
        if bond.order != BondOrder::Single || !conjugated_edge(idx) {
            continue;
        }
        let (a, b) = (bond.a, bond.b);
        // alternating walk mate(b) -> ... -> a; absence rules the bond out
        let start = mate[b];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reachable = false;
        'bfs: while let Some(x) = queue.pop_front() {
            for &(y, by) in mol.neighbors(x) {
                if by == idx || mol.bond(by).order != BondOrder::Single || !conjugated_edge(by) {
                    continue;
                }
                let z = mate[y];
                if z == a {
                    reachable = true;
                    break 'bfs;
                }
                if !seen[z] {
                    seen[z] = true;
                    queue.push_back(z);
                }
            }
        }
        // walks can fold over odd cycles, so confirm with an exact search
        if reachable && matchable_without(mol, &conjugated_edge, &mate, a, b) {
            bond_marks[idx] = true;
        }
    }
    let mut atom_marks = vec![false; n];
    for (idx, bond) in mol.bonds().iter().enumerate() {
        if bond_marks[idx] {
            atom_marks[bond.a] = true;
            atom_marks[bond.b] = true;
        }
    }
    // a matching edge is variable iff an incident single edge is
    for (idx, bond) in mol.bonds().iter().enumerate() {
        if bond.order == BondOrder::Double && mate[bond.a] == bond.b && atom_marks[bond.a] {
            bond_marks[idx] = true;
        }
    }
    (atom_marks, bond_marks)
}

/// Whether the conjugated component containing `a` and `b` still has a
/// perfect matching once both atoms are removed.
fn matchable_without(
    mol: &MolGraph,
    conjugated_edge: &dyn Fn(usize) -> bool,
    mate: &[usize],
    a: usize,
    b: usize,
) -> bool {
    let n = mol.atom_count();
    let mut position = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    let mut queue = VecDeque::from([a]);
    let mut seen = vec![false; n];
    seen[a] = true;
    while let Some(x) = queue.pop_front() {
        if x != a && x != b {
            position[x] = nodes.len();
            nodes.push(x);
        }
        for &(y, by) in mol.neighbors(x) {
            if conjugated_edge(by) && !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    debug_assert!(mate[a] != usize::MAX);
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (p, &x) in nodes.iter().enumerate() {
        for &(y, by) in mol.neighbors(x) {
            if conjugated_edge(by) && position[y] != usize::MAX {
                adjacency[p].push((position[y], by));
            }
        }
    }
    let system = PiSystem { nodes, adjacency };
    !system.matchings(1).0.is_empty()
}

/// Resonance-insensitive aromatic form: the molecule is kekulized, then
/// every resonance-variable bond is labelled aromatic and its atoms flagged
/// aromatic. Hydrogen counts are fixed on every atom, so the result does not
/// depend on the Kekulé structure the input was written in.
pub fn perceive_aromaticity(mol: &MolGraph) -> Result<MolGraph, ChemError> {
    let kek = kekulize(mol)?;
    let (atom_marks, bond_marks) = variable_bonds(&kek);
    let mut out = kek.clone();
    for (i, &mark) in atom_marks.iter().enumerate() {
        let h = kek.hydrogens(i);
        let atom = out.atom_mut(i);
        atom.explicit_h = Some(h);
        atom.aromatic = mark;
    }
    for (idx, &marked) in bond_marks.iter().enumerate() {
        if marked {
            out.set_bond_order(idx, BondOrder::Aromatic);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn doubles(m: &MolGraph) -> usize {
        m.bonds().iter().filter(|b| b.order == BondOrder::Double).count()
    }

    #[test]
    fn benzene_alternates() {
        let k = kekulize(&parse_smiles("c1ccccc1").unwrap()).unwrap();
        assert_eq!(doubles(&k), 3);
        for i in 0..6 {
            let d = k
                .neighbors(i)
                .iter()
                .filter(|&&(_, b)| k.bond(b).order == BondOrder::Double)
                .count();
            assert_eq!(d, 1);
            assert_eq!(k.hydrogens(i), 1);
            assert!(!k.atom(i).aromatic);
        }
    }

    #[test]
    fn pyridine_nitrogen_has_one_double_bond() {
        let k = kekulize(&parse_smiles("c1ccncc1").unwrap()).unwrap();
        assert_eq!(doubles(&k), 3);
        assert_eq!(k.hydrogens(3), 0);
        k.check_valences().unwrap();
    }

    #[test]
    fn kekule_input_unchanged() {
        let m = parse_smiles("C1=CC=CC=C1").unwrap();
        assert_eq!(kekulize(&m).unwrap(), m);
    }

    #[test]
    fn resonance_counts() {
        let count = |s: &str| enumerate_resonance(&parse_smiles(s).unwrap(), 64).unwrap().len();
        assert_eq!(count("c1ccccc1"), 2);
        assert_eq!(count("CCO"), 1);
        assert_eq!(count("c1ccc2ccccc2c1"), 3);
        assert_eq!(count("c1ccc(-c2ccccc2)cc1"), 4);
        assert_eq!(count("c1cc[nH]c1"), 1);
    }

    #[test]
    fn truncation_is_reported() {
        let set = enumerate_resonance(&parse_smiles("c1ccc(-c2ccccc2)cc1").unwrap(), 3).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.truncated);
        let set = enumerate_resonance(&parse_smiles("c1ccccc1").unwrap(), 2).unwrap();
        assert!(!set.truncated);
    }

    #[test]
    fn impossible_aromatic_system_fails() {
        assert!(matches!(
            kekulize(&parse_smiles("c1cccc1").unwrap()),
            Err(ChemError::Kekulization { .. })
        ));
    }

    #[test]
    fn perception_is_form_independent() {
        let a = perceive_aromaticity(&parse_smiles("C1=CC=CC=C1").unwrap()).unwrap();
        let b = perceive_aromaticity(&parse_smiles("c1ccccc1").unwrap()).unwrap();
        assert!(a.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        assert_eq!(a.bonds().len(), b.bonds().len());
        // indole: the pyrrole C=C is fixed, the benzo ring varies
        let ind = perceive_aromaticity(&parse_smiles("c1ccc2[nH]ccc2c1").unwrap()).unwrap();
        let marked = ind.atoms().iter().filter(|a| a.aromatic).count();
        assert_eq!(marked, 6);
    }
}
