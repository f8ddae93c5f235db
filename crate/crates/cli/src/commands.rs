use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;
use recondiag::chem::parse_smiles;
use recondiag::classify::{aggregate, classify as classify_trace, ErrorReport, ErrorType, Outcome};
use recondiag::distinguish::{distinguishability_batch, BatchConfig, Method, PosteriorRecord};
use recondiag::histogram::Histogram;
use recondiag::metrics::{
    random_pair_baseline, reconstruction_accuracy, similarity_report, RecordWarning, SimilarityReport,
};
use recondiag::motif::decompose as decompose_mol;
use recondiag::num::mean_std;
use recondiag::trace::{ground_truth_trace, GenTrace};
use recondiag::Gaussian;
use serde::Serialize;

use crate::input;
use crate::output::{Format, OutDir, Warning};
use crate::svg;
use crate::GlobalArgs;

fn pair_warnings(command: &'static str, warnings: &[RecordWarning], line_offset: Option<usize>) -> Vec<Warning> {
    warnings
        .iter()
        .map(|w| Warning {
            command,
            line: line_offset.map(|o| w.index + o),
            molecule_id: Some(w.molecule_id.clone()),
            message: format!("{}: {}", w.field, w.message),
        })
        .collect()
}

#[derive(Serialize)]
struct AccSummary {
    pairs: usize,
    valid: usize,
    skipped: usize,
    matches: usize,
    accuracy: f64,
}

pub fn acc(g: &GlobalArgs, path: &Path) -> Result<()> {
    let pairs = input::pairs(path)?;
    let report = reconstruction_accuracy(&pairs)?;
    let out = OutDir::create(&g.out)?;
    // data rows start on line 2, after the header
    out.warnings(&pair_warnings("acc", &report.warnings, Some(2)))?;
    out.json(
        "acc_summary.json",
        &AccSummary {
            pairs: pairs.len(),
            valid: report.valid,
            skipped: report.skipped,
            matches: report.matches,
            accuracy: report.accuracy,
        },
    )?;
    println!(
        "accuracy {:.4} ({}/{} valid pairs, {} skipped)",
        report.accuracy, report.matches, report.valid, report.skipped
    );
    Ok(())
}

#[derive(Serialize)]
struct HistogramRow {
    bin_lo: f64,
    bin_hi: f64,
    count: u64,
}

fn histogram_rows(h: &Histogram) -> Vec<HistogramRow> {
    (0..h.bins())
        .map(|i| {
            let (bin_lo, bin_hi) = h.edges(i);
            HistogramRow {
                bin_lo,
                bin_hi,
                count: h.counts[i],
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SimilarityHistogramRow {
    bin_lo: f64,
    bin_hi: f64,
    morgan: u64,
    motif: u64,
}

#[derive(Serialize)]
struct SimSummary {
    records: usize,
    skipped: usize,
    exact_excluded: usize,
    mean_morgan: Option<f64>,
    mean_motif: Option<f64>,
    exact_motif_fraction: Option<f64>,
}

impl From<&SimilarityReport> for SimSummary {
    fn from(r: &SimilarityReport) -> Self {
        SimSummary {
            records: r.records.len(),
            skipped: r.warnings.len(),
            exact_excluded: r.exact_excluded,
            mean_morgan: r.mean_morgan,
            mean_motif: r.mean_motif,
            exact_motif_fraction: r.exact_motif_fraction,
        }
    }
}

fn write_similarity(out: &OutDir, stem: &str, title: &str, r: &SimilarityReport, format: Format) -> Result<()> {
    out.records(&format!("{stem}_records"), &r.records, format)?;
    let rows: Vec<SimilarityHistogramRow> = (0..r.morgan_histogram.bins())
        .map(|i| {
            let (bin_lo, bin_hi) = r.morgan_histogram.edges(i);
            SimilarityHistogramRow {
                bin_lo,
                bin_hi,
                morgan: r.morgan_histogram.counts[i],
                motif: r.motif_histogram.counts[i],
            }
        })
        .collect();
    out.csv(&format!("{stem}_histogram.csv"), &rows)?;
    out.text(
        &format!("{stem}_morgan.svg"),
        &svg::histogram(&format!("{title}: Morgan count Tanimoto"), "similarity", &r.morgan_histogram),
    )?;
    out.text(
        &format!("{stem}_motif.svg"),
        &svg::histogram(&format!("{title}: motif Tanimoto"), "similarity", &r.motif_histogram),
    )?;
    Ok(())
}

pub fn sim(g: &GlobalArgs, path: &Path, baseline: Option<&Path>, n: usize, failed_only: bool) -> Result<()> {
    let pairs = input::pairs(path)?;
    let report = similarity_report(&pairs, failed_only)?;
    let format = g.format.unwrap_or(Format::Csv);
    let out = OutDir::create(&g.out)?;
    let mut warnings = pair_warnings("sim", &report.warnings, Some(2));
    write_similarity(&out, "sim", "Reconstructions", &report, format)?;
    let mut summary = BTreeMap::new();
    summary.insert("reconstructions", SimSummary::from(&report));
    if let Some(corpus_path) = baseline {
        let corpus: Vec<String> = input::corpus(corpus_path)?.into_iter().map(|(_, s)| s).collect();
        let base = random_pair_baseline(&corpus, n, g.seed)?;
        warnings.extend(pair_warnings("sim", &base.warnings, None));
        write_similarity(&out, "baseline", "Random pairs", &base, format)?;
        summary.insert("baseline", SimSummary::from(&base));
    }
    out.json("sim_summary.json", &summary)?;
    out.warnings(&warnings)?;
    for (name, s) in &summary {
        println!(
            "{name}: {} records, mean Morgan {}, mean motif {}",
            s.records,
            fmt_opt(s.mean_morgan),
            fmt_opt(s.mean_motif)
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

#[derive(Serialize)]
struct ReportRow {
    molecule_id: String,
    status: &'static str,
    step_index: Option<usize>,
    error_type: Option<ErrorType>,
    correct_steps: usize,
    required_steps: Option<usize>,
}

impl From<&ErrorReport> for ReportRow {
    fn from(r: &ErrorReport) -> Self {
        let (status, step_index, error_type) = match r.outcome {
            Outcome::Success => ("success", None, None),
            Outcome::Incomplete => ("incomplete", None, None),
            Outcome::Error { step_index, error_type } => ("error", Some(step_index), Some(error_type)),
        };
        ReportRow {
            molecule_id: r.molecule_id.clone(),
            status,
            step_index,
            error_type,
            correct_steps: r.correct_steps,
            required_steps: r.required_steps,
        }
    }
}

#[derive(Serialize)]
struct AggregateRow {
    error_type: ErrorType,
    label: &'static str,
    count: usize,
    frequency: f64,
}

pub fn classify(g: &GlobalArgs, path: &Path) -> Result<()> {
    let traces: Vec<(usize, GenTrace)> = input::jsonl(path)?;
    let limit = usize::try_from(g.resonance_limit)?;
    let results: Vec<_> = traces
        .par_iter()
        .map(|(line, t)| (*line, t, classify_trace(t, limit)))
        .collect();
    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    for (line, t, r) in results {
        match r {
            Ok(report) => reports.push(report),
            Err(e) => warnings.push(Warning {
                command: "classify",
                line: Some(line),
                molecule_id: Some(t.molecule_id.clone()),
                message: e.to_string(),
            }),
        }
    }
    let stats = aggregate(&reports);
    let out = OutDir::create(&g.out)?;
    let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
    out.records("classify_reports", &rows, g.format.unwrap_or(Format::Json))?;
    let agg_rows: Vec<AggregateRow> = stats
        .frequencies
        .iter()
        .map(|f| AggregateRow {
            error_type: f.error_type,
            label: f.error_type.label(),
            count: f.count,
            frequency: f.frequency,
        })
        .collect();
    out.csv("classify_aggregate.csv", &agg_rows)?;
    out.json("classify_summary.json", &stats)?;
    let bars: Vec<(String, u64)> = agg_rows.iter().map(|r| (r.label.to_string(), r.count as u64)).collect();
    out.text("classify_errors.svg", &svg::bar_chart("First errors by type", "error type", &bars))?;
    out.warnings(&warnings)?;
    println!(
        "{} traces: {} success, {} error, {} incomplete, {} malformed",
        reports.len() + warnings.len(),
        stats.successes,
        stats.errors,
        stats.incomplete,
        warnings.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct PairRow {
    molecule_id: String,
    p_opt: f64,
    std_error: f64,
    method: Method,
}

#[derive(Serialize)]
struct DistinguishSummary {
    pairs: usize,
    skipped: usize,
    mc_samples: usize,
    seed: u64,
    threshold: f64,
    above_threshold: f64,
    mean_p_opt: f64,
}

pub fn distinguish(g: &GlobalArgs, path: &Path, bins: usize) -> Result<()> {
    let records: Vec<(usize, PosteriorRecord)> = input::jsonl(path)?;
    let mut ids = Vec::new();
    let mut pairs: Vec<(Gaussian, Gaussian)> = Vec::new();
    let mut warnings = Vec::new();
    for (line, rec) in &records {
        match rec.gaussians::<f64>() {
            Ok(pair) => {
                ids.push(rec.molecule_id.clone());
                pairs.push(pair);
            }
            Err(e) => warnings.push(Warning {
                command: "distinguish",
                line: Some(*line),
                molecule_id: Some(rec.molecule_id.clone()),
                message: e.to_string(),
            }),
        }
    }
    if pairs.is_empty() {
        bail!("{}: no valid posterior pairs", path.display());
    }
    let config = BatchConfig {
        mc_samples: usize::try_from(g.mc_samples)?,
        seed: g.seed,
        bins,
        threshold: g.threshold,
    };
    let batch = distinguishability_batch(&pairs, &config)?;
    let rows: Vec<PairRow> = ids
        .into_iter()
        .zip(&batch.results)
        .map(|(molecule_id, r)| PairRow {
            molecule_id,
            p_opt: r.p_opt,
            std_error: r.std_error,
            method: r.method,
        })
        .collect();
    let mean = rows.iter().map(|r| r.p_opt).sum::<f64>() / rows.len() as f64;
    let out = OutDir::create(&g.out)?;
    out.records("distinguish_pairs", &rows, g.format.unwrap_or(Format::Csv))?;
    out.csv("distinguish_histogram.csv", &histogram_rows(&batch.histogram))?;
    out.json(
        "distinguish_summary.json",
        &DistinguishSummary {
            pairs: rows.len(),
            skipped: warnings.len(),
            mc_samples: config.mc_samples,
            seed: config.seed,
            threshold: config.threshold,
            above_threshold: batch.above_threshold,
            mean_p_opt: mean,
        },
    )?;
    out.text(
        "distinguish.svg",
        &svg::histogram("Distinguishability of posterior pairs", "P_opt", &batch.histogram),
    )?;
    out.warnings(&warnings)?;
    println!(
        "{} pairs, mean P_opt {mean:.4}, {:.4} above {}",
        rows.len(),
        batch.above_threshold,
        config.threshold
    );
    Ok(())
}

#[derive(Serialize)]
struct MotifsJson {
    line: usize,
    smiles: String,
    motifs: Vec<String>,
}

#[derive(Serialize)]
struct MotifsCsv {
    line: usize,
    smiles: String,
    n_motifs: usize,
    /// Motifs joined with `.`.
    motifs: String,
}

#[derive(Serialize)]
struct MotifCount {
    motif: String,
    count: u64,
    molecules: u64,
}

/// Parses every corpus line in parallel; failures become warnings.
fn map_corpus<T: Send>(
    command: &'static str,
    corpus: &[(usize, String)],
    f: impl Fn(usize, &str) -> Result<T, String> + Sync,
) -> (Vec<(usize, String, T)>, Vec<Warning>) {
    let results: Vec<_> = corpus.par_iter().map(|(line, smi)| (*line, smi, f(*line, smi))).collect();
    let mut ok = Vec::new();
    let mut warnings = Vec::new();
    for (line, smi, r) in results {
        match r {
            Ok(v) => ok.push((line, smi.clone(), v)),
            Err(message) => warnings.push(Warning {
                command,
                line: Some(line),
                molecule_id: Some(line.to_string()),
                message,
            }),
        }
    }
    (ok, warnings)
}

pub fn decompose(g: &GlobalArgs, path: &Path) -> Result<()> {
    let corpus = input::corpus(path)?;
    let (rows, warnings) = map_corpus("decompose", &corpus, |_, smi| {
        let mol = parse_smiles(smi).map_err(|e| e.to_string())?;
        let motifs = decompose_mol(&mol).map_err(|e| e.to_string())?;
        Ok(motifs.into_iter().map(|m| m.canonical).collect::<Vec<_>>())
    });
    let mut counts: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for (_, _, motifs) in &rows {
        let mut seen: Vec<&str> = Vec::new();
        for m in motifs {
            let e = counts.entry(m.as_str()).or_insert((0, 0));
            e.0 += 1;
            if !seen.contains(&m.as_str()) {
                e.1 += 1;
                seen.push(m);
            }
        }
    }
    let mut count_rows: Vec<MotifCount> = counts
        .into_iter()
        .map(|(motif, (count, molecules))| MotifCount {
            motif: motif.to_string(),
            count,
            molecules,
        })
        .collect();
    count_rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.motif.cmp(&b.motif)));
    let out = OutDir::create(&g.out)?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let json: Vec<MotifsJson> = rows
                .iter()
                .map(|(line, smiles, motifs)| MotifsJson {
                    line: *line,
                    smiles: smiles.clone(),
                    motifs: motifs.clone(),
                })
                .collect();
            out.jsonl("decompose.jsonl", &json)?;
        }
        Format::Csv => {
            let csv: Vec<MotifsCsv> = rows
                .iter()
                .map(|(line, smiles, motifs)| MotifsCsv {
                    line: *line,
                    smiles: smiles.clone(),
                    n_motifs: motifs.len(),
                    motifs: motifs.join("."),
                })
                .collect();
            out.csv("decompose.csv", &csv)?;
        }
    }
    out.csv("motif_counts.csv", &count_rows)?;
    out.warnings(&warnings)?;
    println!(
        "{} molecules, {} distinct motifs, {} skipped",
        rows.len(),
        count_rows.len(),
        warnings.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct GroundTruthSummary {
    molecules: usize,
    skipped: usize,
    required_steps_mean: Option<f64>,
    required_steps_std: Option<f64>,
    required_steps_min: Option<usize>,
    required_steps_max: Option<usize>,
}

pub fn groundtruth(g: &GlobalArgs, path: &Path) -> Result<()> {
    let corpus = input::corpus(path)?;
    let (rows, warnings) = map_corpus("groundtruth", &corpus, |line, smi| {
        ground_truth_trace(&line.to_string(), smi).map_err(|e| e.to_string())
    });
    let traces: Vec<GenTrace> = rows.into_iter().map(|(_, _, t)| t).collect();
    let lengths: Vec<f64> = traces.iter().map(|t| t.steps.len() as f64).collect();
    let stats = mean_std(&lengths);
    let summary = GroundTruthSummary {
        molecules: traces.len(),
        skipped: warnings.len(),
        required_steps_mean: stats.map(|s| s.0),
        required_steps_std: stats.map(|s| s.1),
        required_steps_min: traces.iter().map(|t| t.steps.len()).min(),
        required_steps_max: traces.iter().map(|t| t.steps.len()).max(),
    };
    let out = OutDir::create(&g.out)?;
    out.jsonl("groundtruth_traces.jsonl", &traces)?;
    out.json("groundtruth_summary.json", &summary)?;
    out.warnings(&warnings)?;
    println!(
        "{} traces, required steps {} ± {}",
        summary.molecules,
        fmt_opt(summary.required_steps_mean),
        fmt_opt(summary.required_steps_std)
    );
    Ok(())
}
