//! Reconstruction accuracy and similarity of (original, reconstruction)
//! pairs. Records whose SMILES do not parse are skipped and reported as
//! warnings rather than failing the batch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{canonical_smiles, parse_smiles, MolGraph};
use crate::fingerprint::{
    exact_motif_match, morgan_count_fp, motif_fp, tanimoto_count, CountFingerprint, MotifFingerprint,
    DEFAULT_RADIUS,
};
use crate::histogram::Histogram;

pub const SIMILARITY_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoleculePair {
    pub molecule_id: String,
    pub original: String,
    pub reconstruction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRecord {
    pub molecule_id: String,
    pub tanimoto_morgan: f64,
    pub tanimoto_motif: f64,
    pub exact_motif: bool,
    pub reconstructed_exactly: bool,
}

/// A skipped record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordWarning {
    /// Position in the input list.
    pub index: usize,
    pub molecule_id: String,
    /// `original` or `reconstruction`.
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no pairs given")]
    Empty,
    #[error("no pair has two parseable molecules")]
    NoValidPairs,
    #[error("the corpus needs at least two molecules, found {0}")]
    CorpusTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Matches over valid pairs.
    pub accuracy: f64,
    pub matches: usize,
    pub valid: usize,
    pub skipped: usize,
    pub warnings: Vec<RecordWarning>,
}

struct Parsed {
    original: MolGraph,
    reconstruction: MolGraph,
}

fn parse_pair(index: usize, pair: &MoleculePair) -> Result<Parsed, RecordWarning> {
    let parse = |field: &str, smiles: &str| {
        parse_smiles(smiles).map_err(|e| RecordWarning {
            index,
            molecule_id: pair.molecule_id.clone(),
            field: field.to_string(),
            message: e.to_string(),
        })
    };
    Ok(Parsed {
        original: parse("original", &pair.original)?,
        reconstruction: parse("reconstruction", &pair.reconstruction)?,
    })
}

/// Canonical forms of one pair, or why it was skipped.
fn canonical_pair(index: usize, pair: &MoleculePair) -> Result<(String, String), RecordWarning> {
    let parsed = parse_pair(index, pair)?;
    let canon = |field: &str, mol: &MolGraph| {
        canonical_smiles(mol).map_err(|e| RecordWarning {
            index,
            molecule_id: pair.molecule_id.clone(),
            field: field.to_string(),
            message: e.to_string(),
        })
    };
    Ok((canon("original", &parsed.original)?, canon("reconstruction", &parsed.reconstruction)?))
}

/// Fraction of valid pairs whose canonical SMILES agree.
pub fn reconstruction_accuracy(pairs: &[MoleculePair]) -> Result<AccuracyReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let outcomes: Vec<Result<bool, RecordWarning>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| canonical_pair(i, p).map(|(a, b)| a == b))
        .collect();
    let mut warnings = Vec::new();
    let (mut matches, mut valid) = (0, 0);
    for o in outcomes {
        match o {
            Ok(m) => {
                valid += 1;
                matches += usize::from(m);
            }
            Err(w) => warnings.push(w),
        }
    }
    if valid == 0 {
        return Err(MetricsError::NoValidPairs);
    }
    Ok(AccuracyReport {
        accuracy: matches as f64 / valid as f64,
        matches,
        valid,
        skipped: warnings.len(),
        warnings,
    })
}

struct Features {
    canonical: String,
    morgan: CountFingerprint,
    motifs: MotifFingerprint,
}

fn features(mol: &MolGraph) -> Result<Features, crate::chem::ChemError> {
    Ok(Features {
        canonical: canonical_smiles(mol)?,
        morgan: morgan_count_fp(mol, DEFAULT_RADIUS)?,
        motifs: motif_fp(mol)?,
    })
}

fn similarity_record(index: usize, pair: &MoleculePair) -> Result<SimilarityRecord, RecordWarning> {
    let parsed = parse_pair(index, pair)?;
    let feat = |field: &str, mol: &MolGraph| {
        features(mol).map_err(|e| RecordWarning {
            index,
            molecule_id: pair.molecule_id.clone(),
            field: field.to_string(),
            message: e.to_string(),
        })
    };
    let a = feat("original", &parsed.original)?;
    let b = feat("reconstruction", &parsed.reconstruction)?;
    let exact = a.canonical == b.canonical;
    Ok(SimilarityRecord {
        molecule_id: pair.molecule_id.clone(),
        tanimoto_morgan: tanimoto_count(&a.morgan, &b.morgan),
        tanimoto_motif: tanimoto_count(&a.motifs, &b.motifs),
        exact_motif: exact_motif_match(&a.motifs, &b.motifs),
        reconstructed_exactly: exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub records: Vec<SimilarityRecord>,
    pub warnings: Vec<RecordWarning>,
    /// Pairs dropped by the failed-only filter.
    pub exact_excluded: usize,
    pub mean_morgan: Option<f64>,
    pub mean_motif: Option<f64>,
    /// Fraction of records with identical motif fingerprints.
    pub exact_motif_fraction: Option<f64>,
    pub morgan_histogram: Histogram,
    pub motif_histogram: Histogram,
}

/// Per-pair similarities with summary statistics. With `failed_only`,
/// pairs reconstructed exactly are left out.
pub fn similarity_report(pairs: &[MoleculePair], failed_only: bool) -> Result<SimilarityReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let outcomes: Vec<Result<SimilarityRecord, RecordWarning>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| similarity_record(i, p))
        .collect();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut exact_excluded = 0;
    for o in outcomes {
        match o {
            Ok(r) if failed_only && r.reconstructed_exactly => exact_excluded += 1,
            Ok(r) => records.push(r),
            Err(w) => warnings.push(w),
        }
    }
    if records.is_empty() && exact_excluded == 0 {
        return Err(MetricsError::NoValidPairs);
    }
    let mean = |f: &dyn Fn(&SimilarityRecord) -> f64| {
        (!records.is_empty()).then(|| records.iter().map(f).sum::<f64>() / records.len() as f64)
    };
    Ok(SimilarityReport {
        mean_morgan: mean(&|r| r.tanimoto_morgan),
        mean_motif: mean(&|r| r.tanimoto_motif),
        exact_motif_fraction: mean(&|r| f64::from(u8::from(r.exact_motif))),
        morgan_histogram: Histogram::from_values(0.0, 1.0, SIMILARITY_BINS, records.iter().map(|r| r.tanimoto_morgan)),
        motif_histogram: Histogram::from_values(0.0, 1.0, SIMILARITY_BINS, records.iter().map(|r| r.tanimoto_motif)),
        records,
        warnings,
        exact_excluded,
    })
}

/// Index pairs `(i, j)`, `i != j`, drawn uniformly from a ChaCha8 stream
/// seeded with `seed`.
pub fn random_index_pairs(len: usize, n_pairs: usize, seed: u64) -> Result<Vec<(usize, usize)>, MetricsError> {
    if len < 2 {
        return Err(MetricsError::CorpusTooSmall(len));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_pairs)
        .map(|_| {
            let i = rng.random_range(0..len);
            let mut j = rng.random_range(0..len - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect())
}

/// Similarities of random distinct corpus pairs, for comparison with
/// failed reconstructions. Record ids are `i-j` corpus positions.
pub fn random_pair_baseline(corpus: &[String], n_pairs: usize, seed: u64) -> Result<SimilarityReport, MetricsError> {
    let pairs: Vec<MoleculePair> = random_index_pairs(corpus.len(), n_pairs, seed)?
        .into_iter()
        .map(|(i, j)| MoleculePair {
            molecule_id: format!("{i}-{j}"),
            original: corpus[i].clone(),
            reconstruction: corpus[j].clone(),
        })
        .collect();
    similarity_report(&pairs, false)
}
