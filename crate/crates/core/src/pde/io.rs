use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::spectral::PeriodicGrid2D;

const MAGIC: &[u8; 4] = b"CCNF";
const VERSION: u32 = 1;

/// Writes a field as `CCNF` header plus little-endian samples: complex
/// pairs for `rgl_psi`, reals for `ccn_phi`.
pub fn write_checkpoint(path: &Path, field: &Field2D<f64>) -> Result<()> {
    let g = field.grid;
    let mut buf = Vec::with_capacity(37 + 16 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(field.kind.code());
    buf.extend_from_slice(&(g.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(g.ny as u32).to_le_bytes());
    for v in [g.lx, g.ly, field.t] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for c in field.values() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        if field.kind == FieldKind::RglPsi {
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Field2D<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(|| CcnError::Format("checkpoint truncated".into()))?;
        pos += n;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err(CcnError::Format("bad checkpoint magic".into()));
    }
    let u32_of = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
    let f64_of = |s: &[u8]| f64::from_le_bytes(s.try_into().expect("8 bytes"));
    let version = u32_of(take(4)?);
    if version != VERSION {
        return Err(CcnError::Format(format!("unsupported checkpoint version {version}")));
    }
    let kind = FieldKind::from_code(take(1)?[0])?;
    let nx = u32_of(take(4)?) as usize;
    let ny = u32_of(take(4)?) as usize;
    let lx = f64_of(take(8)?);
    let ly = f64_of(take(8)?);
    let t = f64_of(take(8)?);
    let grid = PeriodicGrid2D::new(nx, ny, lx, ly)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64_of(take(8)?);
        let im = if kind == FieldKind::RglPsi { f64_of(take(8)?) } else { 0.0 };
        values.push(Complex::new(re, im));
    }
    if take(1).is_ok() {
        return Err(CcnError::Format("trailing bytes after checkpoint data".into()));
    }
    let mut field = Field2D::new(grid, kind, values)?;
    field.t = t;
    Ok(field)
}

/// One row of a diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub mode_re: f64,
    pub mode_im: f64,
    pub amplitude: f64,
    /// Fitted exponential rate, absent until a fit exists.
    pub fitted_rate: Option<f64>,
}

const HEADER: [&str; 5] = ["t", "mode_re", "mode_im", "amplitude", "fitted_rate"];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            fmt(r.t),
            fmt(r.mode_re),
            fmt(r.mode_im),
            fmt(r.amplitude),
            r.fitted_rate.map(fmt).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticRow>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(HEADER) {
        return Err(CcnError::Format("unexpected diagnostics header".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| CcnError::Format(format!("{s:?}: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(DiagnosticRow {
            t: num(&rec[0])?,
            mode_re: num(&rec[1])?,
            mode_im: num(&rec[2])?,
            amplitude: num(&rec[3])?,
            fitted_rate: if rec[4].is_empty() { None } else { Some(num(&rec[4])?) },
        });
    }
    Ok(rows)
}
