use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CORPUS: &str = "../core/data/corpus.smi";
const FIXTURES: &str = "../core/data/error_fixtures.jsonl";

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recondiag"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RECON_SEED")
        .env_remove("RECON_FORMAT")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = run(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, content).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn lines(path: PathBuf) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

const TEN_PAIRS: &str = "molecule_id\toriginal\treconstruction
m0\tc1ccccc1\tC1=CC=CC=C1
m1\tCCO\tOCC
m2\tCc1ccccc1\tc1ccccc1C
m3\tCC(=O)O\tOC(C)=O
m4\tCCO\tCCN
m5\tc1ccccc1\tC1CCCCC1
m6\tCCCC\tCC(C)C
m7\tCc1ccccc1\tCCc1ccccc1
m8\tO=C=O\tC=O
m9\tc1ccncc1\tc1ccccc1
";

#[test]
fn acc_on_ten_pairs() {
    let dir = TempDir::new().unwrap();
    let pairs = write(&dir, "pairs.tsv", TEN_PAIRS);
    let out = dir.path().join("out");
    ok(&out, &["acc", pairs.to_str().unwrap()]);
    let s = json(out.join("acc_summary.json"));
    assert_eq!(s["accuracy"], 0.4);
    assert_eq!(s["valid"], 10);
    assert!(lines(out.join("warnings.jsonl")).is_empty());
}

#[test]
fn acc_skips_invalid_smiles() {
    let dir = TempDir::new().unwrap();
    let content = TEN_PAIRS.replace("m9\tc1ccncc1\tc1ccccc1", "m9\tc1ccncc1\tC1CC(");
    let pairs = write(&dir, "pairs.tsv", &content);
    let out = dir.path().join("out");
    ok(&out, &["acc", pairs.to_str().unwrap()]);
    let s = json(out.join("acc_summary.json"));
    assert_eq!(s["valid"], 9);
    assert_eq!(s["matches"], 4);
    assert!((s["accuracy"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-15);
    let w = lines(out.join("warnings.jsonl"));
    assert_eq!(w.len(), 1);
    let w: Value = serde_json::from_str(&w[0]).unwrap();
    assert_eq!(w["molecule_id"], "m9");
    assert_eq!(w["line"], 11);
}

#[test]
fn acc_rejects_empty_and_headerless_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let empty = write(&dir, "empty.tsv", "");
    assert!(!run(&out, &["acc", empty.to_str().unwrap()]).status.success());
    let header_only = write(&dir, "h.tsv", "molecule_id\toriginal\treconstruction\n");
    assert!(!run(&out, &["acc", header_only.to_str().unwrap()]).status.success());
    let bad_header = write(&dir, "b.tsv", "id\ta\tb\nx\tC\tC\n");
    assert!(!run(&out, &["acc", bad_header.to_str().unwrap()]).status.success());
}

#[test]
fn sim_self_pairs_fill_the_top_bin() {
    let dir = TempDir::new().unwrap();
    let content = "molecule_id\toriginal\treconstruction\na\tCCO\tCCO\nb\tc1ccccc1\tc1ccccc1\n";
    let pairs = write(&dir, "pairs.tsv", content);
    let out = dir.path().join("out");
    ok(&out, &["sim", "--all", pairs.to_str().unwrap()]);
    let hist = lines(out.join("sim_histogram.csv"));
    assert_eq!(hist.len(), 21);
    assert!(hist[20].ends_with(",2,2"), "{}", hist[20]);
    let s = json(out.join("sim_summary.json"));
    assert_eq!(s["reconstructions"]["mean_morgan"], 1.0);
    assert!(out.join("sim_morgan.svg").exists());
}

#[test]
fn sim_reports_hand_computed_means() {
    // toluene vs benzene: motifs {c1ccccc1, C} vs {c1ccccc1} give 1/2;
    // ethanol vs methanol: {C, C, O} vs {C, O} give 2/3
    let dir = TempDir::new().unwrap();
    let content = "molecule_id\toriginal\treconstruction\na\tCc1ccccc1\tc1ccccc1\nb\tCCO\tCO\n";
    let pairs = write(&dir, "pairs.tsv", content);
    let out = dir.path().join("out");
    ok(&out, &["sim", pairs.to_str().unwrap()]);
    let s = json(out.join("sim_summary.json"));
    let mean_motif = s["reconstructions"]["mean_motif"].as_f64().unwrap();
    assert!((mean_motif - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
}

#[test]
fn sim_baseline_is_seeded() {
    let dir = TempDir::new().unwrap();
    let pairs = write(&dir, "pairs.tsv", TEN_PAIRS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(out, &["sim", pairs.to_str().unwrap(), "--baseline", CORPUS, "--n", "300"]);
    }
    let read = |p: &Path| fs::read(p.join("baseline_records.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(lines(a.join("baseline_records.csv")).len(), 301);
}

#[test]
fn classify_fixtures_give_seven_labels() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    ok(&out, &["classify", FIXTURES]);
    let agg = lines(out.join("classify_aggregate.csv"));
    assert_eq!(agg[0], "error_type,label,count,frequency");
    assert_eq!(agg.len(), 8);
    for row in &agg[1..] {
        assert!(row.contains(",1,"), "{row}");
    }
    assert_eq!(lines(out.join("classify_reports.jsonl")).len(), 7);
}

#[test]
fn classify_reports_malformed_line() {
    let dir = TempDir::new().unwrap();
    let good = fs::read_to_string(FIXTURES).unwrap();
    let first = good.lines().next().unwrap();
    let traces = write(&dir, "t.jsonl", &format!("{first}\n{{\"molecule_id\": 3\n"));
    let o = run(&dir.path().join("out"), &["classify", traces.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("t.jsonl:2"), "{err}");
}

#[test]
fn classify_warns_on_unreplayable_trace() {
    let dir = TempDir::new().unwrap();
    let bad = r#"{"molecule_id":"x","target":"CC","steps":[{"op":"pick_bond","order":"single"}]}"#;
    let good = fs::read_to_string(FIXTURES).unwrap();
    let traces = write(&dir, "t.jsonl", &format!("{}\n{bad}\n", good.lines().next().unwrap()));
    let out = dir.path().join("out");
    ok(&out, &["classify", traces.to_str().unwrap()]);
    let w = lines(out.join("warnings.jsonl"));
    assert_eq!(w.len(), 1);
    assert!(w[0].contains("\"line\":2"));
}

#[test]
fn distinguish_identical_and_analytic() {
    let dir = TempDir::new().unwrap();
    let content = concat!(
        r#"{"molecule_id":"same","p_mean":[0.1,0.2],"p_logvar":[0.0,0.5],"q_mean":[0.1,0.2],"q_logvar":[0.0,0.5]}"#,
        "\n",
        r#"{"molecule_id":"phi1","p_mean":[0.0],"p_logvar":[0.0],"q_mean":[2.0],"q_logvar":[0.0]}"#,
        "\n",
        r#"{"molecule_id":"bad","p_mean":[0.0],"p_logvar":[0.0],"q_mean":[1.0,2.0],"q_logvar":[0.0,0.0]}"#,
        "\n",
    );
    let post = write(&dir, "post.jsonl", content);
    let out = dir.path().join("out");
    ok(&out, &["--format", "json", "distinguish", post.to_str().unwrap()]);
    let rows: Vec<Value> = lines(out.join("distinguish_pairs.jsonl"))
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["p_opt"], 0.5);
    assert!((rows[1]["p_opt"].as_f64().unwrap() - 0.841_344_746_068_543).abs() <= 0.003);
    let s = json(out.join("distinguish_summary.json"));
    assert_eq!(s["above_threshold"], 0.0);
    assert_eq!(lines(out.join("warnings.jsonl")).len(), 1);
}

#[test]
fn decompose_toluene() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.smi", "Cc1ccccc1\n");
    let out = dir.path().join("out");
    ok(&out, &["decompose", corpus.to_str().unwrap()]);
    let row: Value = serde_json::from_str(&lines(out.join("decompose.jsonl"))[0]).unwrap();
    assert_eq!(row["motifs"].as_array().unwrap().len(), 2);
}

#[test]
fn groundtruth_benzene_and_toluene() {
    let dir = TempDir::new().unwrap();
    let corpus = write(&dir, "c.smi", "c1ccccc1\nCc1ccccc1\nnot a smiles\n");
    let out = dir.path().join("out");
    ok(&out, &["groundtruth", corpus.to_str().unwrap()]);
    let traces: Vec<Value> = lines(out.join("groundtruth_traces.jsonl"))
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(traces[0]["steps"].as_array().unwrap().len(), 1);
    let ops: Vec<&str> = traces[1]["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["op"].as_str().unwrap())
        .collect();
    assert_eq!(ops, ["add_motif", "add_motif", "pick_new_atom", "pick_partial_atom", "pick_bond"]);
    assert_eq!(lines(out.join("warnings.jsonl")).len(), 1);
}
