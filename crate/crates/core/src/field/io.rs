//! Field files: little-endian f64 samples plus a JSON sidecar, and CSV slices.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid3, ScalarField, VectorField};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n: usize,
    pub box_length: f64,
    pub components: usize,
    /// Sample layout: component-major, then x0, x1, x2 with x2 fastest.
    pub layout: String,
    pub dtype: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_samples(path: &Path, grid: &Grid3, comps: &[&ScalarField]) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 * grid.len() * comps.len());
    for c in comps {
        for v in c.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    let meta = FieldSidecar {
        n: grid.n(),
        box_length: grid.box_length(),
        components: comps.len(),
        layout: "component,x0,x1,x2 (x2 fastest)".into(),
        dtype: "f64le".into(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn read_samples(path: &Path, components: usize) -> Result<(Grid3, Vec<Vec<f64>>)> {
    let meta: FieldSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    if meta.components != components {
        return invalid(format!(
            "{} holds {} components, expected {components}",
            path.display(),
            meta.components
        ));
    }
    let grid = Grid3::new(meta.n, meta.box_length)?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.len() * components {
        return invalid(format!("{} has {} bytes, sidecar implies {}", path.display(), bytes.len(), 8 * grid.len() * components));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    Ok((grid, vals.chunks(grid.len()).map(|c| c.to_vec()).collect()))
}

pub fn write_scalar(path: &Path, field: &ScalarField) -> Result<()> {
    write_samples(path, field.grid(), &[field])
}

pub fn write_vector(path: &Path, field: &VectorField) -> Result<()> {
    let c = field.components();
    write_samples(path, field.grid(), &[&c[0], &c[1], &c[2]])
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let (grid, mut v) = read_samples(path, 1)?;
    ScalarField::new(grid, v.remove(0))
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    let (grid, v) = read_samples(path, 3)?;
    let mut it = v.into_iter();
    let mut next = || ScalarField::new(grid, it.next().expect("three components"));
    VectorField::new([next()?, next()?, next()?])
}

/// Samples along axis `axis` through the grid point `through`, as CSV
/// `x,<name>...`.
pub fn write_slice_csv(
    path: &Path,
    axis: usize,
    through: [usize; 3],
    columns: &[(&str, &ScalarField)],
) -> Result<()> {
    if axis > 2 || columns.is_empty() {
        return invalid("slice needs an axis in 0..3 and at least one column");
    }
    let grid = *columns[0].1.grid();
    for (_, c) in columns {
        c.grid().ensure_same(&grid)?;
    }
    let mut out = fs::File::create(path)?;
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(out, "x,{}", names.join(","))?;
    for t in 0..grid.n() {
        let mut p = through;
        p[axis] = t;
        let idx = grid.index(p[0], p[1], p[2]);
        let row: Vec<String> = columns.iter().map(|(_, f)| format!("{:.17e}", f.values()[idx])).collect();
        writeln!(out, "{:.17e},{}", t as f64 * grid.spacing(), row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid3::new(4, 1.5).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].sin() + 0.1 * x[2]);
        let p = dir.path().join("v.bin");
        write_scalar(&p, &f).unwrap();
        assert_eq!(read_scalar(&p).unwrap(), f);
        let a = VectorField::from_fn(g, |x| [x[0], -x[1], x[2] * 2.0]);
        let q = dir.path().join("a.bin");
        write_vector(&q, &a).unwrap();
        assert_eq!(read_vector(&q).unwrap(), a);
        assert!(read_vector(&p).is_err());
    }

    #[test]
    fn slice_csv_has_header_and_n_rows() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid3::new(4, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| x[1]);
        let p = dir.path().join("s.csv");
        write_slice_csv(&p, 1, [0, 0, 0], &[("v", &f)]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,v");
        assert_eq!(lines.len(), 5);
    }
}
