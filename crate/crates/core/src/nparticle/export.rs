use super::tensor::ValueTensor;
use crate::error::invalid;
use crate::measures::Grid1D;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Sidecar describing `values.bin`: little-endian `f64`, slices in time
/// order, within a slice axis 0 (coordinate 1 of particle 1) fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMetadata {
    pub n_particles: usize,
    pub dim: usize,
    pub grid: Grid1D,
    pub horizon: f64,
    pub n_time_steps: usize,
    pub slice_steps: Vec<usize>,
    pub index_order: String,
}

const INDEX_ORDER: &str = "time-major; axis k*d+c is coordinate c of particle k; axis 0 fastest";

/// Write `values.bin` and `metadata.json` into `dir`.
pub fn export_tensor(v: &ValueTensor, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = TensorMetadata {
        n_particles: v.n_particles,
        dim: v.dim,
        grid: v.grid,
        horizon: v.horizon,
        n_time_steps: v.n_time_steps,
        slice_steps: v.slice_steps.clone(),
        index_order: INDEX_ORDER.to_string(),
    };
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)?)?;
    let mut out = BufWriter::new(fs::File::create(dir.join("values.bin"))?);
    for slice in &v.slices {
        for x in slice {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_tensor(dir: &Path) -> Result<ValueTensor> {
    let meta: TensorMetadata = serde_json::from_str(&fs::read_to_string(dir.join("metadata.json"))?)?;
    let bytes = fs::read(dir.join("values.bin"))?;
    let per_slice = meta.grid.n_points().pow((meta.n_particles * meta.dim) as u32);
    if bytes.len() != 8 * per_slice * meta.slice_steps.len() {
        return Err(invalid("values.bin size does not match the metadata"));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    let slices = values.chunks(per_slice).map(<[f64]>::to_vec).collect();
    Ok(ValueTensor {
        n_particles: meta.n_particles,
        dim: meta.dim,
        grid: meta.grid,
        horizon: meta.horizon,
        n_time_steps: meta.n_time_steps,
        slice_steps: meta.slice_steps,
        slices,
    })
}

/// CSV of one slice: columns `x1..x{N·d}, value`.
pub fn write_slice_csv(v: &ValueTensor, slice: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=v.axes()).map(|a| format!("x{a}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    for (flat, value) in v.slices[slice].iter().enumerate() {
        let mut row: Vec<String> = v.node_state(flat).iter().map(|x| x.to_string()).collect();
        row.push(value.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
