//! File formats: trace CSV (`freq_hz,s21_re,s21_im`), value-series CSV
//! (`t_k,value`), and the JSON metadata sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use squidmw_core::consts::{angular_to_hz, hz_to_angular};
use squidmw_core::trace::ComplexTrace;

use crate::error::{CliError, Result};

/// Optional per-file metadata, stored as `<stem>.meta.json` next to the
/// trace.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TraceMeta {
    pub t_s_k: Option<f64>,
    pub coil_current_a: Option<f64>,
    pub pump_freq_hz: Option<f64>,
    pub pump_power_dbm: Option<f64>,
    pub vna_power_dbm: Option<f64>,
    pub f_ifbw_hz: Option<f64>,
    /// For value-series files: which thermal series the values belong to
    /// ("critical_current" or "linear_inductance").
    pub series_kind: Option<String>,
}

pub fn sidecar_path(trace_path: &Path) -> PathBuf {
    let stem = trace_path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    trace_path.with_file_name(format!("{stem}.meta.json"))
}

pub fn write_trace(path: &Path, trace: &ComplexTrace, meta: Option<&TraceMeta>) -> Result<()> {
    let mut out = String::with_capacity(trace.len() * 48 + 32);
    out.push_str("freq_hz,s21_re,s21_im\n");
    for (w, s) in trace.omega.iter().zip(&trace.s21) {
        out.push_str(&format!("{},{},{}\n", angular_to_hz(*w), s.re, s.im));
    }
    write_atomic(path, out.as_bytes())?;
    if let Some(meta) = meta {
        let text = serde_json::to_string_pretty(meta)
            .map_err(|e| CliError::Data(format!("sidecar serialization: {e}")))?;
        write_atomic(&sidecar_path(path), text.as_bytes())?;
    }
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<(ComplexTrace, TraceMeta)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read trace {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty trace file", path.display())))?;
    if header.trim() != "freq_hz,s21_re,s21_im" {
        return Err(CliError::Data(format!(
            "{}: unexpected header {header:?} (expected \"freq_hz,s21_re,s21_im\")",
            path.display()
        )));
    }
    let mut omega = Vec::new();
    let mut s21 = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut field = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| {
                    CliError::Data(format!("{}:{}: missing column {name}", path.display(), i + 2))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| {
                    CliError::Data(format!("{}:{}: bad {name}: {e}", path.display(), i + 2))
                })
        };
        let f = field("freq_hz")?;
        let re = field("s21_re")?;
        let im = field("s21_im")?;
        omega.push(hz_to_angular(f));
        s21.push(Complex64::new(re, im));
    }
    let trace = ComplexTrace::new(omega, s21)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let meta = read_sidecar(path)?;
    Ok((trace, meta))
}

pub fn read_sidecar(trace_path: &Path) -> Result<TraceMeta> {
    let side = sidecar_path(trace_path);
    if !side.exists() {
        return Ok(TraceMeta::default());
    }
    let text = std::fs::read_to_string(&side)
        .map_err(|e| CliError::Data(format!("cannot read sidecar {}: {e}", side.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Data(format!("{} at {}: {}", side.display(), e.path(), e.inner())))
}

/// A (temperature, value) series with a kind tag in the sidecar.
pub fn write_series(path: &Path, kind: &str, points: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("t_k,value\n");
    for (t, v) in points {
        out.push_str(&format!("{t},{v}\n"));
    }
    write_atomic(path, out.as_bytes())?;
    let meta = TraceMeta { series_kind: Some(kind.to_string()), ..Default::default() };
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| CliError::Data(format!("sidecar serialization: {e}")))?;
    write_atomic(&sidecar_path(path), text.as_bytes())
}

pub fn read_series(path: &Path) -> Result<(Vec<(f64, f64)>, TraceMeta)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read series {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{}: empty series file", path.display())))?;
    if header.trim() != "t_k,value" {
        return Err(CliError::Data(format!(
            "{}: unexpected header {header:?} (expected \"t_k,value\")",
            path.display()
        )));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let t: f64 = cols
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| CliError::Data(format!("{}:{}: bad t_k", path.display(), i + 2)))?;
        let v: f64 = cols
            .next()
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| CliError::Data(format!("{}:{}: bad value", path.display(), i + 2)))?;
        points.push((t, v));
    }
    let meta = read_sidecar(path)?;
    Ok((points, meta))
}

/// Long-format CSV writer for plot data and companions.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Serialized writes: write to a temporary file, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp.partial");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
