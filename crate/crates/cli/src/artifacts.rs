//! Run artifacts: `results.csv`, `summary.json` and a `MANIFEST` of content
//! hashes.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use mfc_lab::rates::RateFit;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA: u32 = 1;

/// Header plus rows of preformatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip representation, so files are stable across runs.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl RateEntry {
    pub fn new(label: impl Into<String>, fit: &RateFit) -> Self {
        Self {
            label: label.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            ci_lo: fit.ci_lo,
            ci_hi: fit.ci_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// What an experiment produces before it is written out.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub table: Table,
    pub rates: Vec<RateEntry>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
}

impl RunOutput {
    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub experiment: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub wall_seconds: f64,
    pub config: ExperimentConfig,
    pub rates: Vec<RateEntry>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Writes the three artifacts into `out`; `inputs` are hashed into the manifest.
pub fn write_run(out: &Path, summary: &Summary, table: &Table, inputs: &[PathBuf]) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    table.write(&out.join("results.csv"))?;
    let json = serde_json::to_string_pretty(summary)?;
    std::fs::write(out.join("summary.json"), json + "\n")?;
    let mut manifest = String::new();
    for p in inputs {
        writeln!(manifest, "input\t{}\t{}", sha256_file(p)?, p.display())?;
    }
    for name in ["results.csv", "summary.json"] {
        writeln!(manifest, "output\t{}\t{}", sha256_file(&out.join(name))?, name)?;
    }
    std::fs::write(out.join("MANIFEST"), manifest)?;
    Ok(())
}
