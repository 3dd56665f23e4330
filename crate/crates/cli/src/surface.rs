//! `surface`: integrate the one-forms and write coordinates, mesh and
//! geometry diagnostics.

use std::path::Path;

use dslab_core::weierstrass::{
    integrate_surface, max_closedness, one_form_coefficients, path_independence, surface_geometry,
    IntegrationOptions, SurfaceR4,
};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::io::{self, SURFACE_CSV, SURFACE_OBJ};
use crate::scenario::build_initial;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub initial: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// 1-based coordinates of the OBJ projection.
    pub projection: [usize; 3],
    pub conformal_factor_min: f64,
    pub conformal_factor_max: f64,
    /// `max |sum_k (X^k_z)^2|`.
    pub conformality_residual: f64,
    /// `max |2 |X_z|^2 - e^{2 alpha}| / max e^{2 alpha}`.
    pub metric_residual: f64,
    /// `max ||p| - (e^alpha / 2) |H||`.
    pub curvature_residual: f64,
    pub closedness: f64,
    pub path_independence: f64,
    /// `[x-cycle, y-cycle]` period of each coordinate.
    pub periods: [[f64; 2]; 4],
}

pub fn build_surface(cfg: &ScenarioConfig) -> Result<(SurfaceR4, GeometryReport), CliError> {
    let spec = cfg.grid.spec()?;
    let init = build_initial(cfg)?;
    let forms = one_form_coefficients(&init.psi, &init.phi)?;
    let opts = IntegrationOptions::default();
    let surface = integrate_surface(&forms, [0.0; 4], opts)?;
    let geo = surface_geometry(&init.psi, &init.phi, &surface, &init.potential)?;
    let cf = &geo.conformal_factor;
    let report = GeometryReport {
        initial: cfg.initial.name().into(),
        nx: spec.nx(),
        ny: spec.ny(),
        lx: spec.lx(),
        ly: spec.ly(),
        projection: cfg.output.projection,
        conformal_factor_min: cf.data().iter().map(|c| c.re).fold(f64::INFINITY, f64::min),
        conformal_factor_max: cf
            .data()
            .iter()
            .map(|c| c.re)
            .fold(f64::NEG_INFINITY, f64::max),
        conformality_residual: geo.conformality_residual.max_abs(),
        metric_residual: geo.metric_residual,
        curvature_residual: geo.curvature_residual,
        closedness: max_closedness(&forms),
        path_independence: path_independence(&forms, opts.rule),
        periods: surface.periods,
    };
    Ok((surface, report))
}

pub fn cmd_surface(cfg: &ScenarioConfig, out: &Path) -> Result<GeometryReport, CliError> {
    let (surface, report) = build_surface(cfg)?;
    std::fs::create_dir_all(out)?;
    io::write_text(&out.join(SURFACE_CSV), &surface.to_csv())?;
    let proj = cfg.output.projection.map(|k| k - 1);
    io::write_text(&out.join(SURFACE_OBJ), &surface.to_obj(proj)?)?;
    io::write_json(&out.join("geometry.json"), &report)?;
    Ok(report)
}
