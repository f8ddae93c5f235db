//! Canonical atom ranking and canonical SMILES.
//!
//! Atoms are partitioned by local invariants and the partition is refined
//! with neighbour classes until stable (Morgan-style). Remaining ties are
//! broken by individualising each member of the first tied cell in turn;
//! the labelling whose ranked edge list is lexicographically smallest wins.
//! Branches related by an automorphism already found are skipped.

use super::kekule::perceive_aromaticity;
use super::mol::{BondOrder, MolGraph};
use super::writer::{write_smiles, HydrogenStyle};
use super::ChemError;

/// Canonical SMILES: aromatic perception, canonical ranking, then writing.
/// Different Kekulé forms and atom orders of one molecule give one string.
pub fn canonical_smiles(mol: &MolGraph) -> Result<String, ChemError> {
    Ok(canonical_smiles_of_perceived(&perceive_aromaticity(mol)?))
}

/// Canonical SMILES of a graph that is already in perceived form (see
/// [`perceive_aromaticity`]).
pub fn canonical_smiles_of_perceived(mol: &MolGraph) -> String {
    let ranks = canonical_ranks(mol);
    write_smiles(mol, &ranks, HydrogenStyle::Minimal).smiles
}

fn bond_label(order: BondOrder) -> u64 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

fn atom_invariant(mol: &MolGraph, i: usize) -> u64 {
    let a = mol.atom(i);
    let fields = [
        u64::from(a.element.atomic_number()),
        (i64::from(a.formal_charge) + 8) as u64,
        u64::from(mol.hydrogens(i)),
        u64::from(a.aromatic),
        mol.degree(i) as u64,
        u64::from(mol.is_ring_atom(i)),
    ];
    fields.iter().fold(0u64, |acc, &f| (acc << 8) | (f & 0xff))
}

/// Canonical rank of every atom; a permutation of `0..n` that depends only
/// on the labelled graph, not on its atom order.
pub fn canonical_ranks(mol: &MolGraph) -> Vec<usize> {
    let n = mol.atom_count();
    if n == 0 {
        return Vec::new();
    }
    let invariants: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    let classes = rank_by(&invariants);
    let mut search = Search {
        mol,
        best: None,
        automorphisms: Vec::new(),
    };
    let mut prefix = Vec::new();
    search.descend(classes, &mut prefix);
    search.best.expect("search visits at least one leaf").1
}

/// Dense ranking: each value maps to the number of entries strictly below it.
fn rank_by<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0; keys.len()];
    for k in 1..idx.len() {
        out[idx[k]] = if keys[idx[k]] == keys[idx[k - 1]] {
            out[idx[k - 1]]
        } else {
            k
        };
    }
    out
}

fn distinct(classes: &[usize]) -> usize {
    let mut seen = vec![false; classes.len()];
    classes.iter().filter(|&&c| !std::mem::replace(&mut seen[c], true)).count()
}

fn refine(mol: &MolGraph, mut classes: Vec<usize>) -> Vec<usize> {
    let mut count = distinct(&classes);
    loop {
        let keys: Vec<(usize, Vec<(usize, u64)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(usize, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (classes[j], bond_label(mol.bond(b).order)))
                    .collect();
                nbrs.sort_unstable();
                (classes[i], nbrs)
            })
            .collect();
        let next = rank_by(&keys);
        let next_count = distinct(&next);
        classes = next;
        if next_count == count {
            return classes;
        }
        count = next_count;
    }
}

struct Search<'a> {
    mol: &'a MolGraph,
    best: Option<(Vec<u64>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn certificate(&self, ranks: &[usize]) -> Vec<u64> {
        let mut edges: Vec<u64> = self
            .mol
            .bonds()
            .iter()
            .map(|b| {
                let (x, y) = (ranks[b.a].min(ranks[b.b]), ranks[b.a].max(ranks[b.b]));
                ((x as u64) << 36) | ((y as u64) << 8) | bond_label(b.order)
            })
            .collect();
        edges.sort_unstable();
        edges
    }

    fn descend(&mut self, classes: Vec<usize>, prefix: &mut Vec<usize>) {
        let classes = refine(self.mol, classes);
        let n = classes.len();
        if distinct(&classes) == n {
            self.leaf(classes);
            return;
        }
        // first non-singleton cell
        let mut size = vec![0usize; n];
        for &c in &classes {
            size[c] += 1;
        }
        let cell = (0..n).find(|&c| size[c] > 1).expect("partition is not discrete");
        let members: Vec<usize> = (0..n).filter(|&i| classes[i] == cell).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &members {
            if !explored.is_empty() {
                let orbit = self.orbits(prefix);
                if explored.iter().any(|&u| orbit.same(u, v)) {
                    continue;
                }
            }
            let mut child = classes.clone();
            for &w in &members {
                if w != v {
                    child[w] = cell + 1;
                }
            }
            prefix.push(v);
            self.descend(child, prefix);
            prefix.pop();
            explored.push(v);
        }
    }

    fn leaf(&mut self, ranks: Vec<usize>) {
        let cert = self.certificate(&ranks);
        match &self.best {
            None => self.best = Some((cert, ranks)),
            Some((best_cert, best_ranks)) => match cert.cmp(best_cert) {
                std::cmp::Ordering::Less => self.best = Some((cert, ranks)),
                std::cmp::Ordering::Equal => {
                    // same labelled graph: map best's rank-r atom to ours
                    let n = ranks.len();
                    let mut by_rank = vec![0; n];
                    for (i, &r) in ranks.iter().enumerate() {
                        by_rank[r] = i;
                    }
                    let mut gamma = vec![0; n];
                    for (i, &r) in best_ranks.iter().enumerate() {
                        gamma[i] = by_rank[r];
                    }
                    self.automorphisms.push(gamma);
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }

    /// Orbits of the group generated by known automorphisms that fix every
    /// individualised atom in `prefix`.
    fn orbits(&self, prefix: &[usize]) -> UnionFind {
        let mut uf = UnionFind::new(self.mol.atom_count());
        for gamma in &self.automorphisms {
            if prefix.iter().all(|&p| gamma[p] == p) {
                for (x, &y) in gamma.iter().enumerate() {
                    uf.union(x, y);
                }
            }
        }
        uf
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn same(&self, a: usize, b: usize) -> bool {
        let root = |mut x: usize| {
            while self.parent[x] != x {
                x = self.parent[x];
            }
            x
        };
        root(a) == root(b)
    }
}
