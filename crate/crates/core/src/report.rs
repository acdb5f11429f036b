//! CSV and JSON artifact emission. Every emitted number traces to a method
//! tag and tolerance in the sidecar; identical inputs produce bitwise
//! identical files (shortest-roundtrip float formatting, fixed orders).

use crate::error::Result;
use crate::rep::OperatorMatrix;
use crate::spectral::{ConvexRegion, SpectralSet};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Serialize)]
struct SpectralSidecar<'a> {
    method: crate::spectral::MethodTag,
    resolution: &'a crate::spectral::Resolution,
    points: usize,
    tolerances: &'a [(&'a str, f64)],
}

/// Point cloud as "re,im" rows plus a JSON sidecar at `<path>.meta.json`.
pub fn write_spectral_csv(
    path: &Path,
    set: &SpectralSet,
    tolerances: &[(&str, f64)],
) -> Result<()> {
    let mut csv = String::from("re,im\n");
    for p in set.points() {
        writeln!(csv, "{},{}", fmt(p.re), fmt(p.im)).unwrap();
    }
    std::fs::write(path, csv)?;
    let sidecar = SpectralSidecar {
        method: set.method,
        resolution: &set.resolution,
        points: set.len(),
        tolerances,
    };
    write_sidecar(path, &sidecar)
}

/// Convex region vertices as "re,im" rows (counterclockwise).
pub fn write_region_csv(path: &Path, region: &ConvexRegion, meta: &impl Serialize) -> Result<()> {
    let mut csv = String::from("re,im\n");
    for v in region.vertices() {
        writeln!(csv, "{},{}", fmt(v.re), fmt(v.im)).unwrap();
    }
    std::fs::write(path, csv)?;
    write_sidecar(path, meta)
}

/// Sparse matrix triplets "row,col,re,im"; zero entries are omitted.
pub fn write_matrix_csv(path: &Path, m: &OperatorMatrix) -> Result<()> {
    let mut csv = String::from("row,col,re,im\n");
    for ((i, j), z) in m.data.indexed_iter() {
        if z.re != 0.0 || z.im != 0.0 {
            writeln!(csv, "{i},{j},{},{}", fmt(z.re), fmt(z.im)).unwrap();
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}

/// Dense text form for small matrices.
pub fn matrix_to_text(m: &OperatorMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let z = m.data[[i, j]];
            if j > 0 {
                out.push('\t');
            }
            write!(out, "({},{})", fmt(z.re), fmt(z.im)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Two-column numeric table (plot data: bound vs parameter, etc.).
pub fn write_profile_csv(path: &Path, header: (&str, &str), rows: &[(i64, f64)]) -> Result<()> {
    let mut csv = format!("{},{}\n", header.0, header.1);
    for (p, v) in rows {
        writeln!(csv, "{p},{}", fmt(*v)).unwrap();
    }
    std::fs::write(path, csv)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::InvalidInput(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn write_sidecar(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".meta.json");
    write_json(Path::new(&sidecar_path), value)
}

/// Shortest-roundtrip formatting; negative zero is normalized.
fn fmt(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x}")
}
