//! File formats and atomic writes.
//!
//! - Draw matrix CSV: header row of unit ids, one row per kept iteration,
//!   values serialized with 17 significant digits (exact round trip).
//! - Counts CSV: `unit,y,E`.
//! - Truth CSV: `unit,theta`.
//! - Estimate CSV: `unit,value`.
//! - Adjacency: one line per node, `index: space-separated neighbours`,
//!   1-based, symmetric.
//!
//! All writes go through a temp file in the destination directory followed
//! by a rename.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ed_core::models::AdjacencyGraph;
use ed_core::{Ensemble, PosteriorDrawMatrix};

use crate::Invalid;

/// 17-significant-digit decimal serialization: round-trips every f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    std::io::Write::write_all(&mut tmp, contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_draws(path: &Path, m: &PosteriorDrawMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&m.unit_ids().join(","));
    out.push('\n');
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn read_draws(path: &Path) -> Result<PosteriorDrawMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let unit_ids: Vec<String> = reader
        .headers()
        .context("reading draw matrix header")?
        .iter()
        .map(str::to_owned)
        .collect();
    let n = unit_ids.len();
    let mut draws = Vec::new();
    let mut n_rows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        if record.len() != n {
            return Err(Invalid(format!(
                "{}: line {}: expected {} fields, found {}",
                path.display(),
                idx + 2,
                n,
                record.len()
            ))
            .into());
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Invalid(format!(
                    "{}: line {}, column {}: `{}` is not a number",
                    path.display(),
                    idx + 2,
                    col + 1,
                    field
                ))
            })?;
            if !v.is_finite() {
                return Err(Invalid(format!(
                    "{}: line {}, column {}: non-finite value",
                    path.display(),
                    idx + 2,
                    col + 1
                ))
                .into());
            }
            draws.push(v);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Invalid(format!("{}: no draw rows", path.display())).into());
    }
    Ok(PosteriorDrawMatrix::new(draws, n_rows, n, unit_ids)?)
}

/// Per-unit counts: observed `y` and expected/scale `E`.
#[derive(Debug, Clone)]
pub struct CountsFile {
    pub units: Vec<String>,
    pub y: Vec<f64>,
    pub expected: Vec<f64>,
}

impl CountsFile {
    /// Observed counts as integers; errors when any `y` is not integral.
    pub fn integer_counts(&self) -> Result<Vec<u64>> {
        self.y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as u64)
                } else {
                    Err(Invalid(format!(
                        "unit {}: count {} is not a non-negative integer",
                        self.units[i], v
                    ))
                    .into())
                }
            })
            .collect()
    }
}

pub fn write_counts(path: &Path, units: &[String], y: &[f64], expected: &[f64]) -> Result<()> {
    let mut out = String::from("unit,y,E\n");
    for ((u, yv), ev) in units.iter().zip(y).zip(expected) {
        let _ = writeln!(out, "{u},{yv},{ev}");
    }
    write_atomic(path, &out)
}

pub fn read_counts(path: &Path) -> Result<CountsFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| anyhow!(Invalid(format!("{}: missing column `{name}`", path.display()))))
    };
    let (cu, cy, ce) = (col("unit")?, col("y")?, col("E")?);
    let mut units = Vec::new();
    let mut y = Vec::new();
    let mut expected = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |c: usize| -> Result<f64> {
            let field = record.get(c).unwrap_or("");
            let v: f64 = field.trim().parse().map_err(|_| {
                Invalid(format!(
                    "{}: line {}, column {}: `{}` is not a number",
                    path.display(),
                    idx + 2,
                    c + 1,
                    field
                ))
            })?;
            if !v.is_finite() {
                bail!(Invalid(format!(
                    "{}: line {}: non-finite value",
                    path.display(),
                    idx + 2
                )));
            }
            Ok(v)
        };
        units.push(record.get(cu).unwrap_or("").to_owned());
        y.push(parse(cy)?);
        expected.push(parse(ce)?);
    }
    if units.is_empty() {
        return Err(Invalid(format!("{}: no data rows", path.display())).into());
    }
    Ok(CountsFile { units, y, expected })
}

pub fn write_ensemble(path: &Path, header: &str, units: &[String], values: &[f64]) -> Result<()> {
    let mut out = format!("unit,{header}\n");
    for (u, v) in units.iter().zip(values) {
        let _ = writeln!(out, "{u},{}", fmt_f64(*v));
    }
    write_atomic(path, &out)
}

pub fn read_ensemble(path: &Path) -> Result<(Vec<String>, Ensemble<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut units = Vec::new();
    let mut values = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Invalid(format!(
                "{}: line {}: expected `unit,value`",
                path.display(),
                idx + 2
            ))
            .into());
        }
        units.push(record.get(0).unwrap().to_owned());
        let field = record.get(1).unwrap();
        values.push(field.trim().parse::<f64>().map_err(|_| {
            Invalid(format!(
                "{}: line {}: `{}` is not a number",
                path.display(),
                idx + 2,
                field
            ))
        })?);
    }
    Ok((units, Ensemble::new(values)?))
}

/// Parses the `index: neighbours` adjacency format (1-based, symmetric).
pub fn read_adjacency(path: &Path) -> Result<AdjacencyGraph> {
    let contents =
        fs::read_to_string(path).with_context(|| format!("opening {}", path.display()))?;
    let mut entries: Vec<(usize, Vec<usize>)> = Vec::new();
    for (lineno, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_once(':').ok_or_else(|| {
            Invalid(format!(
                "{}: line {}: expected `index: neighbours`",
                path.display(),
                lineno + 1
            ))
        })?;
        let parse_idx = |s: &str| -> Result<usize> {
            let v: usize = s.trim().parse().map_err(|_| {
                Invalid(format!(
                    "{}: line {}: `{}` is not a node index",
                    path.display(),
                    lineno + 1,
                    s.trim()
                ))
            })?;
            if v == 0 {
                bail!(Invalid(format!(
                    "{}: line {}: node indices are 1-based",
                    path.display(),
                    lineno + 1
                )));
            }
            Ok(v)
        };
        let node = parse_idx(head)?;
        let neighbours = tail
            .split_whitespace()
            .map(parse_idx)
            .collect::<Result<Vec<usize>>>()?;
        entries.push((node, neighbours));
    }
    if entries.is_empty() {
        return Err(Invalid(format!("{}: empty adjacency", path.display())).into());
    }
    let n = entries.iter().map(|(i, _)| *i).max().unwrap();
    let mut neighbors = vec![Vec::new(); n];
    for (node, list) in entries {
        for j in list {
            if j > n {
                return Err(Invalid(format!(
                    "{}: node {node} lists out-of-range neighbour {j}",
                    path.display()
                ))
                .into());
            }
            neighbors[node - 1].push(j - 1);
        }
    }
    Ok(AdjacencyGraph::new(neighbors)?)
}

/// Centroid CSV: `unit,x,y`.
pub fn read_centroids(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 3 {
            return Err(Invalid(format!(
                "{}: line {}: expected `unit,x,y`",
                path.display(),
                idx + 2
            ))
            .into());
        }
        let parse = |c: usize| -> Result<f64> {
            record.get(c).unwrap().trim().parse::<f64>().map_err(|_| {
                Invalid(format!(
                    "{}: line {}: `{}` is not a number",
                    path.display(),
                    idx + 2,
                    record.get(c).unwrap()
                ))
                .into()
            })
        };
        out.push((parse(1)?, parse(2)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("draws.csv");
        let m = PosteriorDrawMatrix::from_rows(vec![
            vec![1.0 / 3.0, -2.5e-13],
            vec![std::f64::consts::PI, 7.0],
        ])
        .unwrap();
        write_draws(&path, &m).unwrap();
        let back = read_draws(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn single_cell_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let m = PosteriorDrawMatrix::from_rows(vec![vec![std::f64::consts::LN_2]]).unwrap();
        write_draws(&path, &m).unwrap();
        assert_eq!(read_draws(&path).unwrap(), m);
    }

    #[test]
    fn ragged_and_nan_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1.0,2.0\n3.0\n").unwrap();
        let err = read_draws(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        fs::write(&path, "a,b\n1.0,NaN\n").unwrap();
        assert!(read_draws(&path).is_err());
    }

    #[test]
    fn adjacency_round_trip_and_asymmetry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("adj.txt");
        fs::write(&path, "1: 2\n2: 1\n").unwrap();
        let g = read_adjacency(&path).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.neighbors(0), &[1]);

        fs::write(&path, "1: 2\n2:\n").unwrap();
        assert!(read_adjacency(&path).is_err());
    }

    #[test]
    fn counts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        write_counts(
            &path,
            &["a".into(), "b".into()],
            &[3.0, 0.0],
            &[1.5, 2.25],
        )
        .unwrap();
        let back = read_counts(&path).unwrap();
        assert_eq!(back.y, vec![3.0, 0.0]);
        assert_eq!(back.expected, vec![1.5, 2.25]);
        assert_eq!(back.integer_counts().unwrap(), vec![3, 0]);
    }
}
