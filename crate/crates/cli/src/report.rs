//! Consolidated report over the `summary.json` files of a run directory.

use crate::artifacts::Summary;
use anyhow::{bail, Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// `summary.json` in `dir` itself and in its immediate subdirectories,
/// sorted by path.
fn find_summaries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let own = dir.join("summary.json");
    if own.is_file() {
        found.push(own);
    }
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path().join("summary.json");
        if path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

struct Row {
    run: String,
    experiment: String,
    rate: String,
    slope: String,
    ci: String,
    pass: bool,
}

/// Writes `report.md` and `report.csv` into `dir`; rerunning gives
/// byte-identical files. Returns the number of table rows.
pub fn emit_report(dir: &Path) -> Result<usize> {
    let paths = find_summaries(dir)?;
    if paths.is_empty() {
        bail!(mfc_lab::Error::InsufficientData(format!("no summary.json under {}", dir.display())));
    }
    let mut rows = Vec::new();
    for path in &paths {
        let text = std::fs::read_to_string(path)?;
        let s: Summary = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let run = path
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .map(|p| p.display().to_string())
            .filter(|p| !p.is_empty())
            .unwrap_or_else(|| ".".into());
        if s.rates.is_empty() {
            rows.push(Row {
                run,
                experiment: s.experiment,
                rate: "n/a".into(),
                slope: String::new(),
                ci: String::new(),
                pass: s.pass,
            });
            continue;
        }
        for r in &s.rates {
            rows.push(Row {
                run: run.clone(),
                experiment: s.experiment.clone(),
                rate: r.label.clone(),
                slope: format!("{:.4}", r.slope),
                ci: format!("[{:.4}, {:.4}]", r.ci_lo, r.ci_hi),
                pass: s.pass,
            });
        }
    }

    let mut md = String::from(
        "# Experiment report\n\n| run | experiment | rate | slope | 95% CI | checks |\n|---|---|---|---|---|---|\n",
    );
    for r in &rows {
        let verdict = if r.pass { "pass" } else { "fail" };
        writeln!(md, "| {} | {} | {} | {} | {} | {} |", r.run, r.experiment, r.rate, r.slope, r.ci, verdict)?;
    }
    std::fs::write(dir.join("report.md"), md)?;

    let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
    w.write_record(["run", "experiment", "rate", "slope", "ci", "pass"])?;
    for r in &rows {
        w.write_record([&r.run, &r.experiment, &r.rate, &r.slope, &r.ci, &r.pass.to_string()])?;
    }
    w.flush()?;
    Ok(rows.len())
}
