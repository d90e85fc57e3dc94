//! CSV exchange for clouds and densities: one row per atom or node with
//! columns `x1..xd, weight`.

use super::{DiscreteDensity, EmpiricalMeasure, Grid1D};
use crate::error::invalid;
use crate::Result;
use std::path::Path;

/// Write a cloud; every row carries weight `1/N`.
pub fn write_cloud_csv(path: &Path, m: &EmpiricalMeasure) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=m.dim()).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    let weight = 1.0 / m.len() as f64;
    for i in 0..m.len() {
        let mut row: Vec<String> = m.point(i).iter().map(|x| format!("{x:e}")).collect();
        row.push(format!("{weight:e}"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cloud_csv(path: &Path) -> Result<EmpiricalMeasure> {
    let mut r = csv::Reader::from_path(path)?;
    let dim = r
        .headers()?
        .len()
        .checked_sub(1)
        .filter(|&d| d > 0)
        .ok_or_else(|| invalid("cloud CSV needs x columns and a weight"))?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for k in 0..dim {
            pts.push(rec[k].trim().parse::<f64>().map_err(|e| invalid(format!("bad coordinate: {e}")))?);
        }
    }
    EmpiricalMeasure::new(dim, pts)
}

/// Write a density as `(x1, weight)` rows, `weight` being the nodal density value.
pub fn write_density_csv(path: &Path, d: &DiscreteDensity) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x1", "weight"])?;
    for (x, v) in d.grid().nodes().iter().zip(d.weights()) {
        w.write_record([format!("{x:e}"), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a density written by [`write_density_csv`]; the nodes must be uniform.
pub fn read_density_csv(path: &Path) -> Result<DiscreteDensity> {
    let mut r = csv::Reader::from_path(path)?;
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let p = |s: &str| s.trim().parse::<f64>().map_err(|e| invalid(format!("bad number: {e}")));
        xs.push(p(&rec[0])?);
        ws.push(p(&rec[1])?);
    }
    if xs.len() < 2 {
        return Err(invalid("density CSV needs at least two rows"));
    }
    let grid = Grid1D::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let h = grid.spacing();
    if xs.iter().enumerate().any(|(i, x)| (x - grid.node(i)).abs() > 1e-9 * h.max(1.0)) {
        return Err(invalid("density nodes are not uniformly spaced"));
    }
    DiscreteDensity::partial(grid, ws)
}
