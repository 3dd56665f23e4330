//! File writers and the readers used by `export`.

use std::path::Path;

use dslab_core::flow::DiagnosticsRecord;
use dslab_core::weierstrass::SurfaceR4;
use dslab_core::{Complex64, ComplexField, GridSpec};
use serde::Serialize;

use crate::CliError;

pub const DRIFT_CSV: &str = "drift.csv";
pub const DIAGNOSTICS_JSONL: &str = "diagnostics.jsonl";
pub const SURFACE_CSV: &str = "surface.csv";
pub const SURFACE_OBJ: &str = "surface.obj";
pub const W_SVG: &str = "willmore_drift.svg";
pub const J_SVG: &str = "j_drift.svg";

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    s.push('\n');
    write_text(path, &s)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).map_err(|e| CliError::Io(std::io::Error::other(e)))?);
        s.push('\n');
    }
    write_text(path, &s)
}

const DRIFT_HEADER: &str =
    "t,W,J1_re,J1_im,J2_re,J2_im,J3_re,J3_im,J4_re,J4_im,dirac_residual,closedness";

pub fn drift_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = format!("{DRIFT_HEADER}\n");
    for r in records {
        out.push_str(&format!("{:e},{:e}", r.t, r.w));
        for j in r.j {
            out.push_str(&format!(",{:e},{:e}", j.re, j.im));
        }
        out.push_str(&format!(
            ",{:e},{:e}\n",
            r.dirac_residual_max, r.closedness_max
        ));
    }
    out
}

pub fn parse_drift_csv(text: &str) -> Result<Vec<DiagnosticsRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(DRIFT_HEADER) {
        return Err(CliError::Config(format!("{DRIFT_CSV}: unexpected header")));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || CliError::Config(format!("{DRIFT_CSV}: bad row {}", k + 2));
        let v: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        if v.len() != 12 {
            return Err(bad());
        }
        out.push(DiagnosticsRecord {
            t: v[0],
            w: v[1],
            j: std::array::from_fn(|i| Complex64::new(v[2 + 2 * i], v[3 + 2 * i])),
            dirac_residual_max: v[10],
            closedness_max: v[11],
        });
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{DRIFT_CSV}: no rows")));
    }
    Ok(out)
}

/// Rebuilds coordinates from the `x,y,X1..X4` layout. Periods are not
/// stored, so the result is only good for meshes.
pub fn parse_surface_csv(text: &str) -> Result<SurfaceR4, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("x,y,X1,X2,X3,X4") {
        return Err(CliError::Config(format!(
            "{SURFACE_CSV}: unexpected header"
        )));
    }
    let mut rows: Vec<[f64; 6]> = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || CliError::Config(format!("{SURFACE_CSV}: bad row {}", k + 2));
        let v: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        rows.push(v.try_into().map_err(|_| bad())?);
    }
    let y0 = rows
        .first()
        .map(|r| r[1])
        .ok_or_else(|| CliError::Config(format!("{SURFACE_CSV}: no rows")))?;
    let nx = rows.iter().take_while(|r| r[1] == y0).count();
    let ny = rows.len() / nx;
    if nx * ny != rows.len() || nx < 2 || ny < 2 {
        return Err(CliError::Config(format!(
            "{SURFACE_CSV}: {} rows do not form a grid",
            rows.len()
        )));
    }
    let dx = rows[1][0] - rows[0][0];
    let dy = rows[nx][1] - rows[0][1];
    let spec = GridSpec::new(nx, ny, nx as f64 * dx, ny as f64 * dy)
        .map_err(|e| CliError::Config(format!("{SURFACE_CSV}: {e}")))?;
    let x = std::array::from_fn(|k| {
        ComplexField::from_vec(
            spec,
            rows.iter().map(|r| Complex64::new(r[2 + k], 0.0)).collect(),
        )
        .expect("row count checked")
    });
    Ok(SurfaceR4 {
        x,
        base: [rows[0][2], rows[0][3], rows[0][4], rows[0][5]],
        periods: [[0.0; 2]; 4],
    })
}
