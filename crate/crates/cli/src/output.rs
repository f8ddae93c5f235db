use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

pub const WARNINGS_FILE: &str = "warnings.jsonl";

/// Encoding of per-record output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A record skipped without aborting the command.
#[derive(Debug, Clone, Serialize)]
pub struct Warning {
    pub command: &'static str,
    /// 1-based line in the input file, when the record came from one.
    pub line: Option<usize>,
    pub molecule_id: Option<String>,
    pub message: String,
}

/// Output directory; every file a command writes goes through here.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn writer(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.path(name);
        let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    pub fn text(&self, name: &str, content: &str) -> Result<()> {
        let mut w = self.writer(name)?;
        w.write_all(content.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = self.writer(name)?;
        for row in rows {
            serde_json::to_writer(&mut w, row)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.writer(name)?);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `stem.jsonl` or `stem.csv`; returns the file name.
    pub fn records<T: Serialize>(&self, stem: &str, rows: &[T], format: Format) -> Result<String> {
        let name = match format {
            Format::Json => format!("{stem}.jsonl"),
            Format::Csv => format!("{stem}.csv"),
        };
        match format {
            Format::Json => self.jsonl(&name, rows)?,
            Format::Csv => self.csv(&name, rows)?,
        }
        Ok(name)
    }

    pub fn warnings(&self, warnings: &[Warning]) -> Result<()> {
        self.jsonl(WARNINGS_FILE, warnings)
    }
}
