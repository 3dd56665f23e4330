//! `evolve`: run the coupled deformation and write diagnostics, drift data,
//! plots and optional surface snapshots.

use std::path::Path;

use dslab_core::flow::{
    conservation_report, run, ConservationReport, DeformationState, FlowConfig,
};
use dslab_core::hierarchy::A3Variant;
use dslab_core::weierstrass::{integrate_surface, one_form_coefficients, IntegrationOptions};
use serde::Serialize;

use crate::config::{FlowSection, GridSection, ScenarioConfig};
use crate::io::{self, DIAGNOSTICS_JSONL, DRIFT_CSV, J_SVG, W_SVG};
use crate::plot;
use crate::scenario::build_initial;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct EvolveManifest {
    pub initial: String,
    pub grid: GridSection,
    pub flow: FlowSection,
    pub a3_variant: A3Variant,
    pub records: usize,
    pub drift: ConservationReport,
    pub snapshots: Vec<String>,
}

pub fn cmd_evolve(cfg: &ScenarioConfig, out: &Path) -> Result<EvolveManifest, CliError> {
    let init = build_initial(cfg)?;
    let state = DeformationState::new(init.potential.p, init.psi, init.phi)?;
    let mut fc = FlowConfig::new(cfg.flow.n).map_err(|e| CliError::Config(e.to_string()))?;
    fc.variant = cfg.hierarchy.a3_variant;
    fc.dealias = cfg.flow.dealias;
    fc.blowup = cfg.flow.blowup;
    let stride = (cfg.flow.snapshot_stride > 0).then_some(cfg.flow.snapshot_stride);
    let result = run(&state, cfg.flow.dt, cfg.flow.steps, &fc, stride)?;

    std::fs::create_dir_all(out)?;
    io::write_jsonl(&out.join(DIAGNOSTICS_JSONL), &result.records)?;
    io::write_text(&out.join(DRIFT_CSV), &io::drift_csv(&result.records))?;
    io::write_text(
        &out.join(W_SVG),
        &plot::willmore_drift_chart(&result.records),
    )?;
    io::write_text(&out.join(J_SVG), &plot::j_drift_chart(&result.records))?;

    let mut snapshots = Vec::new();
    if !result.snapshots.is_empty() {
        let dir = out.join("snapshots");
        std::fs::create_dir_all(&dir)?;
        for (k, s) in &result.snapshots {
            let forms = one_form_coefficients(&s.psi, &s.phi)?;
            let surface = integrate_surface(&forms, [0.0; 4], IntegrationOptions::default())?;
            let name = format!("snapshots/surface_{k:06}.csv");
            io::write_text(&out.join(&name), &surface.to_csv())?;
            snapshots.push(name);
        }
    }
    let manifest = EvolveManifest {
        initial: cfg.initial.name().into(),
        grid: cfg.grid,
        flow: cfg.flow,
        a3_variant: cfg.hierarchy.a3_variant,
        records: result.records.len(),
        drift: conservation_report(&result.records)?,
        snapshots,
    };
    io::write_json(&out.join("evolve.json"), &manifest)?;
    Ok(manifest)
}
