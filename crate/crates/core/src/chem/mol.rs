use serde::{Deserialize, Serialize};

use super::element::Element;
use super::ChemError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Hydrogen count fixed by a bracket atom. `None` means the count is
    /// implied by the valence table and follows the atom's bonds.
    pub explicit_h: Option<u8>,
    pub aromatic: bool,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            formal_charge: 0,
            explicit_h: None,
            aromatic: false,
        }
    }

    pub fn with_charge(mut self, charge: i8) -> Self {
        self.formal_charge = charge;
        self
    }

    pub fn with_explicit_h(mut self, h: u8) -> Self {
        self.explicit_h = Some(h);
        self
    }

    pub fn aromatic(mut self) -> Self {
        self.aromatic = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the bond-order sum; aromatic bonds count one, with
    /// the extra pi electron accounted for separately.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn kekule_orders() -> [BondOrder; 3] {
        [BondOrder::Single, BondOrder::Double, BondOrder::Triple]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    /// Endpoints, stored with `a < b`.
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Attributed molecular graph. Hydrogens are implicit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    ring_atoms: Vec<bool>,
    ring_bonds: Vec<bool>,
}

impl MolGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.ring_atoms.push(false);
        self.atoms.len() - 1
    }

    /// Adds a bond and refreshes ring membership.
    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, ChemError> {
        self.push_bond(a, b, order)?;
        self.perceive_rings();
        Ok(self.bonds.len() - 1)
    }

    /// Adds a bond without refreshing ring flags; callers batch-insert and
    /// then call [`MolGraph::perceive_rings`].
    pub(crate) fn push_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<(), ChemError> {
        let n = self.atoms.len();
        if a >= n || b >= n {
            return Err(ChemError::AtomIndex(a.max(b)));
        }
        if a == b {
            return Err(ChemError::SelfBond(a));
        }
        if self.bond_between(a, b).is_some() {
            return Err(ChemError::DuplicateBond(a.min(b), a.max(b)));
        }
        let idx = self.bonds.len();
        self.bonds.push(Bond {
            a: a.min(b),
            b: a.max(b),
            order,
        });
        self.adjacency[a].push((b, idx));
        self.adjacency[b].push((a, idx));
        self.ring_bonds.push(false);
        Ok(())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub(crate) fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub(crate) fn set_bond_order(&mut self, i: usize, order: BondOrder) {
        self.bonds[i].order = order;
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbor, bond index)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, idx)| idx)
    }

    pub fn is_ring_atom(&self, i: usize) -> bool {
        self.ring_atoms[i]
    }

    pub fn is_ring_bond(&self, i: usize) -> bool {
        self.ring_bonds[i]
    }

    pub fn has_aromatic(&self) -> bool {
        self.atoms.iter().any(|a| a.aromatic)
            || self.bonds.iter().any(|b| b.order == BondOrder::Aromatic)
    }

    /// Sum of bond valences at atom `i` (aromatic bonds count one).
    pub fn bond_order_sum(&self, i: usize) -> u8 {
        self.adjacency[i]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence())
            .sum()
    }

    fn aromatic_bond_count(&self, i: usize) -> usize {
        self.adjacency[i]
            .iter()
            .filter(|&&(_, b)| self.bonds[b].order == BondOrder::Aromatic)
            .count()
    }

    /// Whether aromatic atom `i` must take a double bond when kekulized.
    ///
    /// The atom needs a pi bond when the smallest valence that fits its
    /// sigma bonds (plus fixed hydrogens) still has a free unit.
    pub fn needs_pi_bond(&self, i: usize) -> bool {
        let atom = &self.atoms[i];
        if !atom.aromatic || self.aromatic_bond_count(i) == 0 {
            return false;
        }
        let used = self.bond_order_sum(i) + atom.explicit_h.unwrap_or(0);
        match atom.element.fitting_valence(atom.formal_charge, used) {
            Some(v) => v > used,
            None => false,
        }
    }

    /// Total hydrogen count of atom `i`.
    pub fn hydrogens(&self, i: usize) -> u8 {
        let atom = &self.atoms[i];
        if let Some(h) = atom.explicit_h {
            return h;
        }
        let used = self.bond_order_sum(i);
        let Some(v) = atom.element.fitting_valence(atom.formal_charge, used) else {
            return 0;
        };
        let pi = u8::from(self.needs_pi_bond(i));
        v - used - pi
    }

    /// Checks that no atom exceeds the largest valence of its element.
    pub fn check_valences(&self) -> Result<(), ChemError> {
        for i in 0..self.atoms.len() {
            if !self.valence_ok(i) {
                return Err(ChemError::Valence {
                    atom: i,
                    element: self.atoms[i].element,
                });
            }
        }
        Ok(())
    }

    /// Drops fixed hydrogen counts so every atom takes the implicit count
    /// of its element, charge and bonds.
    pub fn clear_explicit_hydrogens(&mut self) {
        for atom in &mut self.atoms {
            atom.explicit_h = None;
        }
    }

    pub fn valence_ok(&self, i: usize) -> bool {
        let atom = &self.atoms[i];
        let used = self.bond_order_sum(i)
            + atom.explicit_h.unwrap_or(0)
            + u8::from(self.needs_pi_bond(i));
        matches!(atom.element.max_valence(atom.formal_charge), Some(max) if used <= max)
    }

    /// Recomputes ring membership: a bond is a ring bond iff it is not a bridge.
    pub fn perceive_rings(&mut self) {
        let n = self.atoms.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut is_bridge = vec![false; self.bonds.len()];
        let mut timer = 0usize;
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (node, parent bond, next neighbor position)
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (u, parent_bond, ref mut pos)) = stack.last_mut() {
                if *pos < self.adjacency[u].len() {
                    let (v, b) = self.adjacency[u][*pos];
                    *pos += 1;
                    if b == parent_bond {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        stack.push((v, b, 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            is_bridge[parent_bond] = true;
                        }
                    }
                }
            }
        }
        self.ring_bonds = is_bridge.iter().map(|&br| !br).collect();
        self.ring_atoms = vec![false; n];
        for (idx, bond) in self.bonds.iter().enumerate() {
            if self.ring_bonds[idx] {
                self.ring_atoms[bond.a] = true;
                self.ring_atoms[bond.b] = true;
            }
        }
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.atoms.len() <= 1 || self.components().len() == 1
    }

    /// Induced subgraph on `atoms`, in the given order. Atom flags and
    /// hydrogen policy are copied unchanged.
    pub fn subgraph(&self, atoms: &[usize]) -> MolGraph {
        let mut index = vec![usize::MAX; self.atoms.len()];
        let mut out = MolGraph::new();
        for (new, &old) in atoms.iter().enumerate() {
            index[old] = new;
            out.add_atom(self.atoms[old].clone());
        }
        for bond in &self.bonds {
            let (a, b) = (index[bond.a], index[bond.b]);
            if a != usize::MAX && b != usize::MAX {
                out.push_bond(a, b, bond.order).expect("induced bond is valid");
            }
        }
        out.perceive_rings();
        out
    }

    /// Copy of the graph with atoms relabelled so that old atom `i` becomes
    /// new atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolGraph {
        let n = self.atoms.len();
        let mut inverse = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut out = MolGraph::new();
        for &old in &inverse {
            out.add_atom(self.atoms[old].clone());
        }
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a].min(perm[b.b]),
                b: perm[b.a].max(perm[b.b]),
                order: b.order,
            })
            .collect();
        bonds.sort_by_key(|b| (b.a, b.b));
        for b in bonds {
            out.push_bond(b.a, b.b, b.order).expect("permuted bond is valid");
        }
        out.perceive_rings();
        out
    }

    /// Appends `other` as a disjoint component; returns the index offset.
    pub fn append(&mut self, other: &MolGraph) -> usize {
        let offset = self.atoms.len();
        for atom in &other.atoms {
            self.add_atom(atom.clone());
        }
        for bond in &other.bonds {
            self.push_bond(bond.a + offset, bond.b + offset, bond.order)
                .expect("appended bond is valid");
        }
        self.perceive_rings();
        offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> MolGraph {
        let mut m = MolGraph::new();
        for _ in 0..n {
            m.add_atom(Atom::new(Element::C));
        }
        for i in 1..n {
            m.add_bond(i - 1, i, BondOrder::Single).unwrap();
        }
        m
    }

    #[test]
    fn ring_flags_follow_bridges() {
        let mut m = chain(4);
        assert!((0..4).all(|i| !m.is_ring_atom(i)));
        m.add_bond(0, 2, BondOrder::Single).unwrap();
        assert!(m.is_ring_atom(0) && m.is_ring_atom(1) && m.is_ring_atom(2));
        assert!(!m.is_ring_atom(3));
        assert!(!m.is_ring_bond(2));
    }

    #[test]
    fn implicit_hydrogens() {
        let m = chain(3);
        assert_eq!(m.hydrogens(0), 3);
        assert_eq!(m.hydrogens(1), 2);
    }

    #[test]
    fn duplicate_and_self_bonds_rejected() {
        let mut m = chain(2);
        assert!(matches!(
            m.add_bond(1, 0, BondOrder::Single),
            Err(ChemError::DuplicateBond(0, 1))
        ));
        assert!(matches!(m.add_bond(1, 1, BondOrder::Single), Err(ChemError::SelfBond(1))));
        assert!(matches!(m.add_bond(0, 5, BondOrder::Single), Err(ChemError::AtomIndex(5))));
    }

    #[test]
    fn valence_violation_detected() {
        let mut m = MolGraph::new();
        m.add_atom(Atom::new(Element::O));
        m.add_atom(Atom::new(Element::C));
        m.add_bond(0, 1, BondOrder::Triple).unwrap();
        assert!(matches!(m.check_valences(), Err(ChemError::Valence { atom: 0, .. })));
    }
}
