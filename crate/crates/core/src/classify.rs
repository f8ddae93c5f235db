//! First-error classification of generation traces.
//!
//! A state is viable when the generation can still end in the target. For
//! a settled graph that means it embeds into some resonance structure of
//! the kekulized target. While an attachment is open, the check looks
//! ahead over the choices still to be made: after a motif is added, some
//! (motif atom, previous atom, order) attachment must embed; after the
//! motif atom is picked, some (previous atom, order); after the previous
//! atom is picked, some order. The first step whose resulting state is not
//! viable is the error, and its kind decides the error type.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{
    canonical_smiles, enumerate_resonance, parse_smiles, BondOrder, ChemError, MolGraph,
    ResonanceSet,
};
use crate::num::mean_std;
use crate::subiso::{count_embeddings, is_subgraph_prepared, ElementChargeMatch, PreparedTarget};
use crate::trace::{ground_truth_steps, GenStep, GenTrace, Phase, PartialGraph, StepError, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ErrorType {
    WrongAttachmentPoint,
    NewMotifNotAttachable,
    WrongBondType,
    NewMotifNotContained,
    MotifAlreadyAdded,
    IncorrectRingFormed,
    FirstMotifNotInTarget,
}

impl ErrorType {
    pub const ALL: [ErrorType; 7] = [
        ErrorType::WrongAttachmentPoint,
        ErrorType::NewMotifNotAttachable,
        ErrorType::WrongBondType,
        ErrorType::NewMotifNotContained,
        ErrorType::MotifAlreadyAdded,
        ErrorType::IncorrectRingFormed,
        ErrorType::FirstMotifNotInTarget,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorType::WrongAttachmentPoint => "Wrong attachment point",
            ErrorType::NewMotifNotAttachable => "New motif not attachable",
            ErrorType::WrongBondType => "Wrong bond type",
            ErrorType::NewMotifNotContained => "New motif not contained",
            ErrorType::MotifAlreadyAdded => "Motif already added",
            ErrorType::IncorrectRingFormed => "Incorrect ring formed",
            ErrorType::FirstMotifNotInTarget => "First motif not in target",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    /// Every step viable and the final graph equals the target.
    Success,
    Error { step_index: usize, error_type: ErrorType },
    /// Every step viable but the trace ends before the target is complete.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub molecule_id: String,
    pub outcome: Outcome,
    /// Steps before the first error; the trace length otherwise.
    pub correct_steps: usize,
    /// Length of the reference trace for the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("target does not parse: {0}")]
    Target(#[from] ChemError),
    #[error("malformed trace at {0}")]
    Trace(#[from] TraceError),
}

/// Kekulized target with its resonance structures and canonical SMILES.
#[derive(Debug, Clone)]
pub struct TargetIndex {
    pub resonance: ResonanceSet,
    pub canonical: String,
    pub required_steps: usize,
}

impl TargetIndex {
    pub fn new(target: &MolGraph, resonance_limit: usize) -> Result<Self, ChemError> {
        Ok(TargetIndex {
            resonance: enumerate_resonance(target, resonance_limit)?,
            canonical: canonical_smiles(target)?,
            required_steps: ground_truth_steps(target)?.len(),
        })
    }

    pub fn from_smiles(target: &str, resonance_limit: usize) -> Result<Self, ChemError> {
        Self::new(&parse_smiles(target)?, resonance_limit)
    }
}

struct Checker<'a> {
    structures: Vec<PreparedTarget<'a>>,
}

impl<'a> Checker<'a> {
    fn new(resonance: &'a ResonanceSet) -> Self {
        Checker {
            structures: resonance.structures.iter().map(PreparedTarget::new).collect(),
        }
    }

    fn embeds(&self, graph: &MolGraph) -> bool {
        self.structures
            .iter()
            .any(|t| is_subgraph_prepared(graph, t, &ElementChargeMatch))
    }

    fn embeds_with_bond(&self, graph: &MolGraph, a: usize, b: usize, order: BondOrder) -> bool {
        let mut g = graph.clone();
        if g.add_bond(a, b, order).is_err() || !g.valence_ok(a) || !g.valence_ok(b) {
            return false;
        }
        self.embeds(&g)
    }

    fn some_order_embeds(&self, graph: &MolGraph, a: usize, b: usize) -> bool {
        BondOrder::kekule_orders()
            .into_iter()
            .any(|o| self.embeds_with_bond(graph, a, b, o))
    }

    fn some_partner_embeds(&self, state: &PartialGraph, new_atom: usize) -> bool {
        (0..state.previous_atom_count()).any(|p| self.some_order_embeds(state.graph(), new_atom, p))
    }

    fn viable(&self, state: &PartialGraph) -> bool {
        let graph = state.graph();
        // every lookahead needs the unattached pieces to embed first
        if !self.embeds(graph) {
            return false;
        }
        match state.phase() {
            Phase::AwaitNewAtom => state
                .last_motif_atoms()
                .any(|new_atom| self.some_partner_embeds(state, new_atom)),
            Phase::AwaitPartialAtom => {
                self.some_partner_embeds(state, state.pending_new_atom().expect("picked"))
            }
            Phase::AwaitBond => self.some_order_embeds(
                graph,
                state.pending_new_atom().expect("picked"),
                state.pending_partial_atom().expect("picked"),
            ),
            Phase::Empty | Phase::Ready | Phase::Stopped => true,
        }
    }

    /// Largest number of occurrences of `motif` in any one structure,
    /// counted up to automorphism of the motif.
    fn occurrences(&self, motif: &MolGraph) -> u64 {
        self.structures
            .iter()
            .map(|t| count_embeddings(motif, t.graph(), &ElementChargeMatch, true))
            .max()
            .unwrap_or(0)
    }
}

/// True iff the graph of `state` embeds into some structure of `target`.
pub fn reconstructable(state: &PartialGraph, target: &ResonanceSet) -> bool {
    Checker::new(target).embeds(state.graph())
}

/// True iff `state` can still be completed to the target, looking ahead
/// over open attachment choices as described in the module docs.
pub fn viable(state: &PartialGraph, target: &ResonanceSet) -> bool {
    Checker::new(target).viable(state)
}

pub fn classify(trace: &GenTrace, resonance_limit: usize) -> Result<ErrorReport, ClassifyError> {
    let target = TargetIndex::from_smiles(&trace.target, resonance_limit)?;
    classify_with(trace, &target)
}

/// Replays `trace` against a prepared target and reports the first error.
///
/// A bond step that exceeds a valence is a failing step rather than a
/// malformed trace. Any other replay error is returned as
/// [`ClassifyError::Trace`].
pub fn classify_with(trace: &GenTrace, target: &TargetIndex) -> Result<ErrorReport, ClassifyError> {
    let checker = Checker::new(&target.resonance);
    let mut state = PartialGraph::new();
    let report = |outcome: Outcome, correct_steps: usize| ErrorReport {
        molecule_id: trace.molecule_id.clone(),
        outcome,
        correct_steps,
        required_steps: Some(target.required_steps),
    };
    for (k, step) in trace.steps.iter().enumerate() {
        let before = state.clone();
        let failed = match state.apply(step) {
            Ok(()) => !checker.viable(&state),
            Err(StepError::Valence(_))
                if matches!(step, GenStep::PickBond { .. } | GenStep::ExtraBond { .. }) =>
            {
                true
            }
            Err(source) => {
                return Err(TraceError {
                    step_index: k,
                    source,
                }
                .into())
            }
        };
        if failed {
            let (step_index, error_type) = blame(&checker, trace, k, &before, &state);
            return Ok(report(
                Outcome::Error {
                    step_index,
                    error_type,
                },
                step_index,
            ));
        }
    }
    let complete = matches!(state.phase(), Phase::Ready | Phase::Stopped)
        && canonical_smiles(state.graph())? == target.canonical;
    let outcome = if complete {
        Outcome::Success
    } else {
        Outcome::Incomplete
    };
    Ok(report(outcome, trace.steps.len()))
}

/// Error type of failing step `k`; `before` is the state preceding it and
/// `after` the state it produced (equal to `before` if it could not apply).
fn blame(
    checker: &Checker<'_>,
    trace: &GenTrace,
    k: usize,
    before: &PartialGraph,
    after: &PartialGraph,
) -> (usize, ErrorType) {
    match &trace.steps[k] {
        GenStep::AddMotif { .. } if k == 0 => (k, ErrorType::FirstMotifNotInTarget),
        GenStep::AddMotif { .. } => {
            let atoms: Vec<usize> = after.last_motif_atoms().collect();
            let motif = after.graph().subgraph(&atoms);
            if !checker.embeds(&motif) {
                return (k, ErrorType::NewMotifNotContained);
            }
            let key = canonical_smiles(&motif).expect("motif was accepted by replay");
            if u64::from(after.used_count(&key)) > checker.occurrences(&motif) {
                (k, ErrorType::MotifAlreadyAdded)
            } else {
                (k, ErrorType::NewMotifNotAttachable)
            }
        }
        GenStep::PickNewAtom { .. } | GenStep::PickPartialAtom { .. } => (k, ErrorType::WrongAttachmentPoint),
        GenStep::PickBond { .. } => {
            let a = before.pending_new_atom().expect("phase checked by replay");
            let b = before.pending_partial_atom().expect("phase checked by replay");
            if checker.some_order_embeds(before.graph(), a, b) {
                (k, ErrorType::WrongBondType)
            } else {
                // no order salvages the pair: blame the selection that fixed it
                let selection = trace.steps[..k]
                    .iter()
                    .rposition(|s| matches!(s, GenStep::PickPartialAtom { .. } | GenStep::PickNewAtom { .. }))
                    .unwrap_or(k);
                (selection, ErrorType::WrongAttachmentPoint)
            }
        }
        GenStep::ExtraBond { .. } => (k, ErrorType::IncorrectRingFormed),
        // these leave the graph unchanged, so they cannot turn a viable state into a failing one
        GenStep::StopBonds | GenStep::Stop => unreachable!("non-modifying step cannot fail"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[usize]) -> Option<MeanStd> {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        mean_std(&v).map(|(mean, std)| MeanStd { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeFrequency {
    pub error_type: ErrorType,
    pub count: usize,
    /// Fraction of errored traces.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateErrorStats {
    pub traces: usize,
    pub successes: usize,
    pub incomplete: usize,
    pub errors: usize,
    /// One entry per error type, in table order.
    pub frequencies: Vec<TypeFrequency>,
    /// Over errored traces.
    pub correct_steps: Option<MeanStd>,
    /// Over all traces with a reference length.
    pub required_steps: Option<MeanStd>,
}

pub fn aggregate(reports: &[ErrorReport]) -> AggregateErrorStats {
    let mut counts: BTreeMap<ErrorType, usize> = BTreeMap::new();
    let (mut successes, mut incomplete) = (0, 0);
    let mut correct = Vec::new();
    for r in reports {
        match r.outcome {
            Outcome::Success => successes += 1,
            Outcome::Incomplete => incomplete += 1,
            Outcome::Error { error_type, .. } => {
                *counts.entry(error_type).or_insert(0) += 1;
                correct.push(r.correct_steps);
            }
        }
    }
    let errors = correct.len();
    let frequencies = ErrorType::ALL
        .iter()
        .map(|&t| {
            let count = counts.get(&t).copied().unwrap_or(0);
            TypeFrequency {
                error_type: t,
                count,
                frequency: if errors == 0 { 0.0 } else { count as f64 / errors as f64 },
            }
        })
        .collect();
    let required: Vec<usize> = reports.iter().filter_map(|r| r.required_steps).collect();
    AggregateErrorStats {
        traces: reports.len(),
        successes,
        incomplete,
        errors,
        frequencies,
        correct_steps: MeanStd::of(&correct),
        required_steps: MeanStd::of(&required),
    }
}
