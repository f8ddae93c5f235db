//! Generation traces: the step model, the replay engine that rebuilds the
//! partial graph after each step, and a builder for reference traces.
//!
//! Partial graphs are Kekulé graphs with implicit hydrogens: an atom's
//! hydrogen count always follows from its element, charge and bonds, so
//! attaching a bond consumes a hydrogen. Atom indices follow the order of
//! addition; a motif's atoms keep the order in which its SMILES lists them.

use std::collections::{BTreeMap, VecDeque};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{
    canonical_ranks, canonical_smiles, kekulize, parse_smiles, write_smiles, BondOrder, ChemError,
    HydrogenStyle, MolGraph,
};
use crate::motif::decompose_with_cuts;

/// One generation step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum GenStep {
    /// Add an atom or motif, given as SMILES.
    AddMotif { smiles: String },
    /// Select the attachment atom inside the motif just added.
    PickNewAtom { index: usize },
    /// Select the attachment atom in the graph built before that motif.
    PickPartialAtom { index: usize },
    /// Connect the two selected atoms.
    PickBond { order: BondOrder },
    /// Add a bond between two atoms already in the graph.
    ExtraBond { a: usize, b: usize, order: BondOrder },
    StopBonds,
    Stop,
}

impl GenStep {
    pub fn name(&self) -> &'static str {
        match self {
            GenStep::AddMotif { .. } => "add_motif",
            GenStep::PickNewAtom { .. } => "pick_new_atom",
            GenStep::PickPartialAtom { .. } => "pick_partial_atom",
            GenStep::PickBond { .. } => "pick_bond",
            GenStep::ExtraBond { .. } => "extra_bond",
            GenStep::StopBonds => "stop_bonds",
            GenStep::Stop => "stop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenTrace {
    pub molecule_id: String,
    #[serde(default)]
    pub model_id: String,
    pub target: String,
    pub steps: Vec<GenStep>,
}

/// What the next step must be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Nothing added yet.
    Empty,
    /// Any motif is attached; a new motif, extra bonds or stop may follow.
    Ready,
    AwaitNewAtom,
    AwaitPartialAtom,
    AwaitBond,
    Stopped,
}

impl Phase {
    fn expects(self) -> &'static str {
        match self {
            Phase::Empty => "add_motif",
            Phase::Ready => "add_motif, extra_bond, stop_bonds or stop",
            Phase::AwaitNewAtom => "pick_new_atom",
            Phase::AwaitPartialAtom => "pick_partial_atom",
            Phase::AwaitBond => "pick_bond",
            Phase::Stopped => "end of trace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("expected {expected}, found {found}")]
    UnexpectedStep { expected: &'static str, found: &'static str },
    #[error("atom index {index} out of range (0..{len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("bond orders must be single, double or triple")]
    AromaticOrder,
    #[error("cannot bond atom {0} to itself")]
    SelfBond(usize),
    #[error("atoms {0} and {1} are already bonded")]
    DuplicateBond(usize, usize),
    #[error("bond exceeds the valence of atom {0}")]
    Valence(usize),
    #[error("invalid motif: {0}")]
    Motif(#[from] ChemError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step_index}: {source}")]
pub struct TraceError {
    pub step_index: usize,
    pub source: StepError,
}

/// Molecule under construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialGraph {
    graph: MolGraph,
    last_motif: Range<usize>,
    pending_new_atom: Option<usize>,
    pending_partial_atom: Option<usize>,
    used_motifs: BTreeMap<String, u32>,
    phase: Phase,
}

impl Default for PartialGraph {
    fn default() -> Self {
        PartialGraph {
            graph: MolGraph::new(),
            last_motif: 0..0,
            pending_new_atom: None,
            pending_partial_atom: None,
            used_motifs: BTreeMap::new(),
            phase: Phase::Empty,
        }
    }
}

impl PartialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn graph(&self) -> &MolGraph {
        &self.graph
    }

    /// Graph indices of the most recently added motif.
    pub fn last_motif_atoms(&self) -> Range<usize> {
        self.last_motif.clone()
    }

    /// Graph index of the selected motif atom, while an attachment is open.
    pub fn pending_new_atom(&self) -> Option<usize> {
        self.pending_new_atom
    }

    pub fn pending_partial_atom(&self) -> Option<usize> {
        self.pending_partial_atom
    }

    /// Canonical motif SMILES added so far, with multiplicity.
    pub fn used_motifs(&self) -> &BTreeMap<String, u32> {
        &self.used_motifs
    }

    pub fn used_count(&self, canonical: &str) -> u32 {
        self.used_motifs.get(canonical).copied().unwrap_or(0)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Number of atoms that existed before the last motif was added.
    pub fn previous_atom_count(&self) -> usize {
        self.last_motif.start
    }

    /// Applies one step in place. On error the state is left unchanged.
    pub fn apply(&mut self, step: &GenStep) -> Result<(), StepError> {
        let unexpected = || StepError::UnexpectedStep {
            expected: self.phase.expects(),
            found: step.name(),
        };
        match (self.phase, step) {
            (Phase::Empty | Phase::Ready, GenStep::AddMotif { smiles }) => {
                let motif = prepare_motif(smiles)?;
                let key = canonical_smiles(&motif)?;
                let first = self.phase == Phase::Empty;
                let offset = self.graph.append(&motif);
                self.last_motif = offset..offset + motif.atom_count();
                *self.used_motifs.entry(key).or_insert(0) += 1;
                self.phase = if first { Phase::Ready } else { Phase::AwaitNewAtom };
            }
            (Phase::AwaitNewAtom, GenStep::PickNewAtom { index }) => {
                let len = self.last_motif.len();
                if *index >= len {
                    return Err(StepError::IndexOutOfRange { index: *index, len });
                }
                self.pending_new_atom = Some(self.last_motif.start + index);
                self.phase = Phase::AwaitPartialAtom;
            }
            (Phase::AwaitPartialAtom, GenStep::PickPartialAtom { index }) => {
                let len = self.previous_atom_count();
                if *index >= len {
                    return Err(StepError::IndexOutOfRange { index: *index, len });
                }
                self.pending_partial_atom = Some(*index);
                self.phase = Phase::AwaitBond;
            }
            (Phase::AwaitBond, GenStep::PickBond { order }) => {
                let a = self.pending_new_atom.expect("set before pick_bond");
                let b = self.pending_partial_atom.expect("set before pick_bond");
                self.add_checked_bond(a, b, *order)?;
                self.pending_new_atom = None;
                self.pending_partial_atom = None;
                self.phase = Phase::Ready;
            }
            (Phase::Ready, GenStep::ExtraBond { a, b, order }) => {
                let len = self.graph.atom_count();
                for &i in [a, b] {
                    if i >= len {
                        return Err(StepError::IndexOutOfRange { index: i, len });
                    }
                }
                self.add_checked_bond(*a, *b, *order)?;
            }
            (Phase::Ready, GenStep::StopBonds) => {}
            (Phase::Ready, GenStep::Stop) => self.phase = Phase::Stopped,
            _ => return Err(unexpected()),
        }
        Ok(())
    }

    fn add_checked_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<(), StepError> {
        if order == BondOrder::Aromatic {
            return Err(StepError::AromaticOrder);
        }
        if a == b {
            return Err(StepError::SelfBond(a));
        }
        if self.graph.bond_between(a, b).is_some() {
            return Err(StepError::DuplicateBond(a.min(b), a.max(b)));
        }
        let mut next = self.graph.clone();
        next.add_bond(a, b, order)?;
        for atom in [a, b] {
            if !next.valence_ok(atom) {
                return Err(StepError::Valence(atom));
            }
        }
        self.graph = next;
        Ok(())
    }
}

/// Parses a motif into the partial-graph convention: Kekulé form, implicit
/// hydrogens, atom order as written.
fn prepare_motif(smiles: &str) -> Result<MolGraph, ChemError> {
    let mut motif = kekulize(&parse_smiles(smiles)?)?;
    motif.clear_explicit_hydrogens();
    motif.check_valences()?;
    Ok(motif)
}

/// Functional form of [`PartialGraph::apply`].
pub fn apply_step(state: &PartialGraph, step: &GenStep) -> Result<PartialGraph, StepError> {
    let mut next = state.clone();
    next.apply(step)?;
    Ok(next)
}

/// State after every step, in order.
pub fn replay(trace: &GenTrace) -> Result<Vec<PartialGraph>, TraceError> {
    let mut state = PartialGraph::new();
    let mut states = Vec::with_capacity(trace.steps.len());
    for (step_index, step) in trace.steps.iter().enumerate() {
        state
            .apply(step)
            .map_err(|source| TraceError { step_index, source })?;
        states.push(state.clone());
    }
    Ok(states)
}

/// Reference trace for `mol`: decompose it into motifs, start from the
/// largest motif (lowest atom index on ties) and attach the rest breadth
/// first along the cut bonds. The steps rebuild the Kekulé form of `mol`
/// exactly, one motif and one single bond at a time.
pub fn ground_truth_steps(mol: &MolGraph) -> Result<Vec<GenStep>, ChemError> {
    let d = decompose_with_cuts(mol)?;
    if d.motifs.is_empty() {
        return Ok(Vec::new());
    }
    // written SMILES of each motif and, per written position, the parent atom
    let written: Vec<(String, Vec<usize>)> = d
        .motifs
        .iter()
        .map(|m| {
            let w = write_smiles(&m.graph, &canonical_ranks(&m.graph), HydrogenStyle::Minimal);
            let parent_atoms = w.order.iter().map(|&local| m.atom_map[local]).collect();
            (w.smiles, parent_atoms)
        })
        .collect();
    let mut start = 0;
    for (i, m) in d.motifs.iter().enumerate() {
        if m.atom_count() > d.motifs[start].atom_count() {
            start = i;
        }
    }
    let n = d.parent.atom_count();
    let mut global = vec![usize::MAX; n];
    let mut placed = vec![false; d.motifs.len()];
    let mut next_index = 0;
    let mut place = |motif: usize, global: &mut Vec<usize>| {
        for &p in &written[motif].1 {
            global[p] = next_index;
            next_index += 1;
        }
    };
    let mut steps = vec![GenStep::AddMotif {
        smiles: written[start].0.clone(),
    }];
    place(start, &mut global);
    placed[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(m) = queue.pop_front() {
        let mut atoms = written[m].1.clone();
        atoms.sort_by_key(|&p| global[p]);
        for p in atoms {
            for &(q, bond) in d.parent.neighbors(p) {
                let other = d.motif_of_atom[q];
                if other == m || placed[other] {
                    continue;
                }
                debug_assert_eq!(d.parent.bond(bond).order, BondOrder::Single);
                let local = written[other]
                    .1
                    .iter()
                    .position(|&x| x == q)
                    .expect("atom belongs to its motif");
                steps.push(GenStep::AddMotif {
                    smiles: written[other].0.clone(),
                });
                steps.push(GenStep::PickNewAtom { index: local });
                steps.push(GenStep::PickPartialAtom { index: global[p] });
                steps.push(GenStep::PickBond {
                    order: d.parent.bond(bond).order,
                });
                place(other, &mut global);
                placed[other] = true;
                queue.push_back(other);
            }
        }
    }
    Ok(steps)
}

/// [`ground_truth_steps`] wrapped as a trace of the target SMILES.
pub fn ground_truth_trace(molecule_id: &str, target: &str) -> Result<GenTrace, ChemError> {
    let mol = parse_smiles(target)?;
    Ok(GenTrace {
        molecule_id: molecule_id.to_string(),
        model_id: "ground_truth".to_string(),
        target: target.to_string(),
        steps: ground_truth_steps(&mol)?,
    })
}
