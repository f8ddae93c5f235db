use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use recondiag::chem::read_smiles_lines;
use recondiag::metrics::MoleculePair;
use serde::de::DeserializeOwned;

const PAIR_HEADER: [&str; 3] = ["molecule_id", "original", "reconstruction"];

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Pairs TSV. A missing or wrong header is an error, as is a row with the
/// wrong number of fields; unparseable SMILES are left for the metrics.
pub fn pairs(path: &Path) -> Result<Vec<MoleculePair>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != PAIR_HEADER {
        bail!("{}: expected header `{}`", path.display(), PAIR_HEADER.join("\\t"));
    }
    let mut out = Vec::new();
    for record in reader.deserialize() {
        let pair: MoleculePair = record.with_context(|| format!("{}", path.display()))?;
        out.push(pair);
    }
    if out.is_empty() {
        bail!("{}: no pairs after the header", path.display());
    }
    Ok(out)
}

/// Non-blank lines of a JSON Lines file, parsed; `(line number, value)`.
pub fn jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(line).with_context(|| format!("{}:{}: malformed record", path.display(), i + 1))?;
        out.push((i + 1, value));
    }
    if out.is_empty() {
        bail!("{}: no records", path.display());
    }
    Ok(out)
}

/// SMILES corpus; `(line number, SMILES)` per molecule.
pub fn corpus(path: &Path) -> Result<Vec<(usize, String)>> {
    let lines = read_smiles_lines(&read(path)?);
    if lines.is_empty() {
        bail!("{}: no molecules", path.display());
    }
    Ok(lines)
}
