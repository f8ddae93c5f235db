//! Count-based fingerprints and Tanimoto similarity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chem::{perceive_aromaticity, BondOrder, ChemError, MolGraph};
use crate::motif::decompose;
use crate::num::Real;

pub const DEFAULT_RADIUS: usize = 2;

/// Sparse count vector; absent keys count zero, present keys count at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountVector<K: Ord> {
    counts: BTreeMap<K, u32>,
}

impl<K: Ord> Default for CountVector<K> {
    fn default() -> Self {
        CountVector {
            counts: BTreeMap::new(),
        }
    }
}

impl<K: Ord> CountVector<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: K, count: u32) {
        if count > 0 {
            *self.counts.entry(key).or_insert(0) += count;
        }
    }

    pub fn get(&self, key: &K) -> u32 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u32)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }
}

impl<K: Ord> FromIterator<(K, u32)> for CountVector<K> {
    fn from_iter<I: IntoIterator<Item = (K, u32)>>(iter: I) -> Self {
        let mut v = CountVector::new();
        for (k, c) in iter {
            v.add(k, c);
        }
        v
    }
}

/// Morgan environment identifier -> count.
pub type CountFingerprint = CountVector<u64>;
/// Canonical motif SMILES -> count.
pub type MotifFingerprint = CountVector<String>;

/// `sum_i min(x_i, y_i) / sum_i max(x_i, y_i)` over the union of keys;
/// 1 when both vectors are empty.
pub fn tanimoto_count<K: Ord, T: Real>(x: &CountVector<K>, y: &CountVector<K>) -> T {
    let (mut min_sum, mut max_sum) = (0u64, 0u64);
    let mut xs = x.counts.iter().peekable();
    let mut ys = y.counts.iter().peekable();
    loop {
        match (xs.peek(), ys.peek()) {
            (Some((kx, &cx)), Some((ky, &cy))) => match kx.cmp(ky) {
                std::cmp::Ordering::Less => {
                    max_sum += u64::from(cx);
                    xs.next();
                }
                std::cmp::Ordering::Greater => {
                    max_sum += u64::from(cy);
                    ys.next();
                }
                std::cmp::Ordering::Equal => {
                    min_sum += u64::from(cx.min(cy));
                    max_sum += u64::from(cx.max(cy));
                    xs.next();
                    ys.next();
                }
            },
            (Some((_, &cx)), None) => {
                max_sum += u64::from(cx);
                xs.next();
            }
            (None, Some((_, &cy))) => {
                max_sum += u64::from(cy);
                ys.next();
            }
            (None, None) => break,
        }
    }
    if max_sum == 0 {
        return T::one();
    }
    T::from_u64(min_sum).expect("count fits") / T::from_u64(max_sum).expect("count fits")
}

// 64-bit FNV-1a over little-endian words.
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(words: &[u64]) -> u64 {
    let mut h = FNV_OFFSET;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

fn bond_code(order: BondOrder) -> u64 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Count-based circular fingerprint.
///
/// Every atom contributes one identifier per iteration `0..=radius`, with no
/// merging of duplicate environments, so the total count is
/// `atoms * (radius + 1)`. Iteration 0 hashes element, charge, degree,
/// hydrogen count and ring membership; each later iteration hashes the
/// previous identifier with the sorted `(bond order, neighbour identifier)`
/// pairs. Bonds are labelled on the aromatic-perceived graph, so all Kekulé
/// forms of a molecule share one fingerprint.
pub fn morgan_count_fp(mol: &MolGraph, radius: usize) -> Result<CountFingerprint, ChemError> {
    let mol = perceive_aromaticity(mol)?;
    let n = mol.atom_count();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            fnv1a(&[
                u64::from(a.element.atomic_number()),
                (i64::from(a.formal_charge) + 8) as u64,
                mol.degree(i) as u64,
                u64::from(mol.hydrogens(i)),
                u64::from(mol.is_ring_atom(i)),
            ])
        })
        .collect();
    let mut fp = CountFingerprint::new();
    for &id in &ids {
        fp.add(id, 1);
    }
    for _ in 0..radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (bond_code(mol.bond(b).order), ids[j]))
                    .collect();
                env.sort_unstable();
                let mut words = Vec::with_capacity(1 + 2 * env.len());
                words.push(ids[i]);
                for (bond, id) in env {
                    words.push(bond);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        for &id in &next {
            fp.add(id, 1);
        }
        ids = next;
    }
    Ok(fp)
}

/// Counts of canonical motif SMILES.
pub fn motif_fp(mol: &MolGraph) -> Result<MotifFingerprint, ChemError> {
    Ok(decompose(mol)?.into_iter().map(|m| (m.canonical, 1)).collect())
}

pub fn exact_motif_match(a: &MotifFingerprint, b: &MotifFingerprint) -> bool {
    a == b
}
