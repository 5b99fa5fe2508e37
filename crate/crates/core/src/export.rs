//! File formats: profile CSV with a JSON sidecar, result JSON, sweep and
//! spectrum CSVs, and raw matrix dumps. Every file is written to a temporary
//! sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::DenseMatrix;
use crate::spectra::KreinClassification;
use crate::verdicts::{KreinIndexResult, SweepReport};
use crate::waves::{Model, WaveProfile};

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetadata {
    pub s: f64,
    pub p: f64,
    pub c: f64,
    pub model: Model,
    pub residual_norm: f64,
    pub boundary_value: f64,
    pub n: usize,
    pub half_length: f64,
    pub warnings: Vec<String>,
}

impl ProfileMetadata {
    pub fn of(u: &WaveProfile) -> Self {
        Self {
            s: u.s,
            p: u.p,
            c: u.c,
            model: u.model,
            residual_norm: u.residual_norm,
            boundary_value: u.boundary_value,
            n: u.grid().n(),
            half_length: u.grid().half_length(),
            warnings: u.warnings.clone(),
        }
    }
}

pub fn profile_csv(u: &WaveProfile) -> String {
    let mut out = String::from("x,U\n");
    for (x, v) in u.grid().points().iter().zip(u.values()) {
        let _ = writeln!(out, "{},{}", fmt_f64(*x), fmt_f64(*v));
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json` and returns both paths.
pub fn write_profile(dir: &Path, stem: &str, u: &WaveProfile) -> Result<(PathBuf, PathBuf)> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    write_atomic(&csv, profile_csv(u).as_bytes())?;
    write_json(&json, &ProfileMetadata::of(u))?;
    Ok((csv, json))
}

pub const SWEEP_HEADER: &str = "s,p,c,model,n_L,slope,K_formula,k_r,k_c,k_i_minus,verdict,status";

pub fn result_row(r: &KreinIndexResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        fmt_f64(r.s),
        fmt_f64(r.p),
        fmt_f64(r.c),
        r.model,
        r.n_l,
        fmt_f64(r.slope),
        r.k_formula,
        r.k_r,
        r.k_c,
        r.k_i_minus,
        r.verdict
    )
}

fn csv_text(s: &str) -> String {
    let flat = s.replace(['\n', '\r'], " ");
    if flat.contains([',', '"']) {
        format!("\"{}\"", flat.replace('"', "\"\""))
    } else {
        flat
    }
}

/// Sweep table; failed points keep their parameters, leave the numbers empty
/// and carry the error in `status`.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for pt in &report.points {
        match &pt.result {
            Ok(r) => {
                let _ = writeln!(out, "{},ok", result_row(r));
            }
            Err(e) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},,,,,,,,{}",
                    fmt_f64(pt.s),
                    fmt_f64(pt.p),
                    fmt_f64(pt.c),
                    pt.model,
                    csv_text(&format!("error: {e}"))
                );
            }
        }
    }
    out
}

pub fn spectrum_csv(k: &KreinClassification) -> String {
    let mut out = String::from("re,im,class,krein_form_value\n");
    for e in &k.eigenvalues {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(e.re),
            fmt_f64(e.im),
            e.class,
            opt_f64(e.krein_form_value)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub order: usize,
    pub label: String,
}

/// Writes `<stem>.bin` (row-major little-endian `f64`) and `<stem>.json`.
pub fn write_matrix(dir: &Path, stem: &str, m: &DenseMatrix) -> Result<(PathBuf, PathBuf)> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let bytes: Vec<u8> = m.row_major().iter().flat_map(|x| x.to_le_bytes()).collect();
    write_atomic(&bin, &bytes)?;
    write_json(
        &json,
        &MatrixHeader {
            order: m.order(),
            label: m.label.clone(),
        },
    )?;
    Ok((bin, json))
}

/// Reads a matrix written by [`write_matrix`] back as rows.
pub fn read_matrix(bin: &Path, header: &Path) -> Result<(MatrixHeader, Vec<Vec<f64>>)> {
    let h: MatrixHeader = serde_json::from_slice(&fs::read(header)?)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != h.order * h.order * 8 {
        return Err(crate::Error::param(format!(
            "matrix file has {} bytes, header order {} needs {}",
            bytes.len(),
            h.order,
            h.order * h.order * 8
        )));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let rows = vals.chunks(h.order.max(1)).map(<[f64]>::to_vec).collect();
    Ok((h, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::waves::sech_profile;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 8.0 * std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(3.9), "3.9");
    }

    #[test]
    fn profile_files() {
        let dir = tempfile::tempdir().unwrap();
        let u = sech_profile(&make_grid(16, 5.0).unwrap(), 2.0, 1.0).unwrap();
        let (csv, json) = write_profile(dir.path(), "wave", &u).unwrap();
        let text = fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 17);
        assert!(text.starts_with("x,U\n"));
        let meta: ProfileMetadata = serde_json::from_slice(&fs::read(json).unwrap()).unwrap();
        assert_eq!(meta.n, 16);
        assert_eq!(meta.model, Model::Fkdv);
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 2);
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = DenseMatrix::from_diagonal("diag", &[1.0, -2.0, 0.5]);
        let (bin, json) = write_matrix(dir.path(), "m", &m).unwrap();
        assert_eq!(fs::metadata(&bin).unwrap().len(), 72);
        let (h, rows) = read_matrix(&bin, &json).unwrap();
        assert_eq!(h.order, 3);
        assert_eq!(rows[1][1], -2.0);
        assert_eq!(rows[0][1], 0.0);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_text("a,b"), "\"a,b\"");
        assert_eq!(csv_text("plain"), "plain");
    }
}
