//! `export`: re-render plots and meshes of a finished run from its stored
//! data files.

use std::path::Path;

use crate::io::{self, DRIFT_CSV, J_SVG, SURFACE_CSV, SURFACE_OBJ, W_SVG};
use crate::plot;
use crate::CliError;

/// Files written, relative to the run directory.
pub fn cmd_export(dir: &Path, projection: [usize; 3]) -> Result<Vec<String>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Config(format!(
            "run directory {} does not exist",
            dir.display()
        )));
    }
    let read = |name: &str| -> Result<Option<String>, CliError> {
        let p = dir.join(name);
        if !p.is_file() {
            return Ok(None);
        }
        Ok(Some(std::fs::read_to_string(p)?))
    };
    let mut written = Vec::new();
    if let Some(text) = read(DRIFT_CSV)? {
        let records = io::parse_drift_csv(&text)?;
        io::write_text(&dir.join(W_SVG), &plot::willmore_drift_chart(&records))?;
        io::write_text(&dir.join(J_SVG), &plot::j_drift_chart(&records))?;
        written.extend([W_SVG.to_string(), J_SVG.to_string()]);
    }
    if let Some(text) = read(SURFACE_CSV)? {
        let surface = io::parse_surface_csv(&text)?;
        let obj = surface
            .to_obj(projection.map(|k| k.wrapping_sub(1)))
            .map_err(|e| CliError::Config(e.to_string()))?;
        io::write_text(&dir.join(SURFACE_OBJ), &obj)?;
        written.push(SURFACE_OBJ.to_string());
    }
    if written.is_empty() {
        return Err(CliError::Config(format!(
            "{} holds neither {DRIFT_CSV} nor {SURFACE_CSV}",
            dir.display()
        )));
    }
    Ok(written)
}
