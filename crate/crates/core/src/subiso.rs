//! Label-aware subgraph monomorphism.
//!
//! A pattern embeds into a target when an injective atom map preserves atom
//! labels and sends every pattern bond to a target bond of equal order. The
//! target may carry extra bonds among mapped atoms (monomorphism, not
//! induced). The search extends the mapping along pattern bonds in a fixed
//! connected order and prunes on labels, degrees and already-mapped
//! neighbours.

use crate::chem::{Atom, BondOrder, MolGraph, ResonanceSet};

/// Atom and bond compatibility used by the matcher.
pub trait MatchSpec {
    fn atoms_match(&self, pattern: &Atom, target: &Atom) -> bool;
    fn bonds_match(&self, pattern: BondOrder, target: BondOrder) -> bool;
}

/// Element and formal charge must agree; bond orders must be equal.
/// Hydrogen counts and aromatic flags are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ElementChargeMatch;

impl MatchSpec for ElementChargeMatch {
    fn atoms_match(&self, pattern: &Atom, target: &Atom) -> bool {
        pattern.element == target.element && pattern.formal_charge == target.formal_charge
    }

    fn bonds_match(&self, pattern: BondOrder, target: BondOrder) -> bool {
        pattern == target
    }
}

/// Target with a dense bond-order matrix, reusable across many patterns.
pub struct PreparedTarget<'a> {
    graph: &'a MolGraph,
    matrix: Vec<Option<BondOrder>>,
}

impl<'a> PreparedTarget<'a> {
    pub fn new(graph: &'a MolGraph) -> Self {
        let n = graph.atom_count();
        let mut matrix = vec![None; n * n];
        for b in graph.bonds() {
            matrix[b.a * n + b.b] = Some(b.order);
            matrix[b.b * n + b.a] = Some(b.order);
        }
        PreparedTarget { graph, matrix }
    }

    pub fn graph(&self) -> &MolGraph {
        self.graph
    }

    fn order(&self, a: usize, b: usize) -> Option<BondOrder> {
        self.matrix[a * self.graph.atom_count() + b]
    }
}

/// Pattern atoms in search order, each with the earlier-placed neighbours it
/// must stay bonded to.
struct Plan {
    order: Vec<usize>,
    /// For each position: (earlier position, bond order) constraints.
    back: Vec<Vec<(usize, BondOrder)>>,
}

impl Plan {
    fn new(pattern: &MolGraph) -> Plan {
        let n = pattern.atom_count();
        let mut placed = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut touching = vec![0usize; n];
        while order.len() < n {
            // prefer atoms bonded to many placed atoms, then high degree
            let next = (0..n)
                .filter(|&i| placed[i] == usize::MAX)
                .max_by(|&a, &b| {
                    (touching[a], pattern.degree(a))
                        .cmp(&(touching[b], pattern.degree(b)))
                        .then(b.cmp(&a))
                })
                .expect("unplaced atom remains");
            placed[next] = order.len();
            order.push(next);
            for &(v, _) in pattern.neighbors(next) {
                touching[v] += 1;
            }
        }
        let back = order
            .iter()
            .map(|&p| {
                let mut cons: Vec<(usize, BondOrder)> = pattern
                    .neighbors(p)
                    .iter()
                    .filter(|&&(q, _)| placed[q] < placed[p])
                    .map(|&(q, b)| (placed[q], pattern.bond(b).order))
                    .collect();
                cons.sort_by_key(|&(pos, _)| pos);
                cons
            })
            .collect();
        Plan { order, back }
    }
}

struct Matcher<'p, 't, 's, S: MatchSpec> {
    pattern: &'p MolGraph,
    target: &'t PreparedTarget<'t>,
    spec: &'s S,
    plan: Plan,
    image: Vec<usize>,
    used: Vec<bool>,
}

impl<S: MatchSpec> Matcher<'_, '_, '_, S> {
    fn candidate_ok(&self, pos: usize, t: usize) -> bool {
        let p = self.plan.order[pos];
        if self.used[t]
            || !self.spec.atoms_match(self.pattern.atom(p), self.target.graph.atom(t))
            || self.pattern.degree(p) > self.target.graph.degree(t)
        {
            return false;
        }
        self.plan.back[pos].iter().all(|&(q, order)| {
            matches!(self.target.order(self.image[q], t), Some(o) if self.spec.bonds_match(order, o))
        })
    }

    /// Depth-first extension; `visit` returns false to stop the search.
    fn extend(&mut self, pos: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if pos == self.plan.order.len() {
            return visit(&self.image);
        }
        let candidates: Vec<usize> = match self.plan.back[pos].first() {
            Some(&(q, _)) => self
                .target
                .graph
                .neighbors(self.image[q])
                .iter()
                .map(|&(t, _)| t)
                .collect(),
            None => (0..self.target.graph.atom_count()).collect(),
        };
        for t in candidates {
            if !self.candidate_ok(pos, t) {
                continue;
            }
            self.image[pos] = t;
            self.used[t] = true;
            let keep_going = self.extend(pos + 1, visit);
            self.used[t] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// Calls `visit` with each embedding (pattern atom -> target atom) until it
/// returns false.
pub fn for_each_embedding<S: MatchSpec>(
    pattern: &MolGraph,
    target: &PreparedTarget<'_>,
    spec: &S,
    mut visit: impl FnMut(&[usize]) -> bool,
) {
    let n = pattern.atom_count();
    if n > target.graph.atom_count() || pattern.bond_count() > target.graph.bond_count() {
        return;
    }
    let plan = Plan::new(pattern);
    let mut matcher = Matcher {
        pattern,
        target,
        spec,
        image: vec![usize::MAX; n],
        used: vec![false; target.graph.atom_count()],
        plan,
    };
    let order = matcher.plan.order.clone();
    let mut mapping = vec![0usize; n];
    matcher.extend(0, &mut |image| {
        for (pos, &p) in order.iter().enumerate() {
            mapping[p] = image[pos];
        }
        visit(&mapping)
    });
}

pub fn is_subgraph_prepared<S: MatchSpec>(pattern: &MolGraph, target: &PreparedTarget<'_>, spec: &S) -> bool {
    let mut found = false;
    for_each_embedding(pattern, target, spec, |_| {
        found = true;
        false
    });
    found
}

pub fn is_subgraph<S: MatchSpec>(pattern: &MolGraph, target: &MolGraph, spec: &S) -> bool {
    is_subgraph_prepared(pattern, &PreparedTarget::new(target), spec)
}

/// True iff `pattern` embeds into at least one structure of `target`.
pub fn embeds_in_any_resonance(pattern: &MolGraph, target: &ResonanceSet) -> bool {
    target
        .structures
        .iter()
        .any(|s| is_subgraph(pattern, s, &ElementChargeMatch))
}

/// Number of embeddings. With `up_to_automorphism` the raw count is divided
/// by the number of automorphisms of the pattern.
pub fn count_embeddings<S: MatchSpec>(
    pattern: &MolGraph,
    target: &MolGraph,
    spec: &S,
    up_to_automorphism: bool,
) -> u64 {
    let raw = count_raw(pattern, target, spec);
    if up_to_automorphism && raw > 0 {
        raw / count_raw(pattern, pattern, spec)
    } else {
        raw
    }
}

fn count_raw<S: MatchSpec>(pattern: &MolGraph, target: &MolGraph, spec: &S) -> u64 {
    let mut count = 0u64;
    for_each_embedding(pattern, &PreparedTarget::new(target), spec, |_| {
        count += 1;
        true
    });
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{kekulize, parse_smiles};

    fn kek(s: &str) -> MolGraph {
        kekulize(&parse_smiles(s).unwrap()).unwrap()
    }

    #[test]
    fn benzene_in_toluene() {
        assert!(is_subgraph(&kek("c1ccccc1"), &kek("Cc1ccccc1"), &ElementChargeMatch));
    }

    #[test]
    fn cyclohexane_not_in_benzene() {
        assert!(!is_subgraph(&kek("C1CCCCC1"), &kek("c1ccccc1"), &ElementChargeMatch));
    }

    #[test]
    fn monomorphism_allows_extra_target_bonds() {
        assert!(is_subgraph(&kek("CCC"), &kek("C1CC1"), &ElementChargeMatch));
    }

    #[test]
    fn embedding_counts() {
        // aromatic-labelled benzene: 6 rotations x 2 reflections
        let aromatic = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(count_embeddings(&aromatic, &aromatic, &ElementChargeMatch, false), 12);
        assert_eq!(count_embeddings(&aromatic, &aromatic, &ElementChargeMatch, true), 1);
        // one Kekule structure keeps only the symmetries preserving alternation
        let benzene = kek("c1ccccc1");
        assert_eq!(count_embeddings(&benzene, &benzene, &ElementChargeMatch, false), 6);
        assert_eq!(count_embeddings(&benzene, &benzene, &ElementChargeMatch, true), 1);
        assert_eq!(count_embeddings(&kek("C"), &kek("CC"), &ElementChargeMatch, false), 2);
        let ring = kek("C1CCCCC1");
        assert_eq!(count_embeddings(&ring, &ring, &ElementChargeMatch, false), 12);
        assert_eq!(count_embeddings(&ring, &ring, &ElementChargeMatch, true), 1);
    }

    #[test]
    fn empty_pattern_embeds() {
        let set = crate::chem::enumerate_resonance(&parse_smiles("c1ccccc1").unwrap(), 64).unwrap();
        assert!(embeds_in_any_resonance(&MolGraph::new(), &set));
    }
}
