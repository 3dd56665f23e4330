//! `verify`: the invariant suite and its JSON manifest.

use std::f64::consts::PI;
use std::path::Path;

use dslab_core::flow::{conservation_report, run, DeformationState, FlowConfig};
use dslab_core::gaussmap::{
    chordal_distance, compare_ratio_families, coordinate_change_y_to_z, gauss_map_of_surface,
    quadric_residual, sigma, sigma_inverse, ProductPoint,
};
use dslab_core::hierarchy::{
    nv_rhs, operator_identity_residual, reduction_defect, resolve_a3_variant, rhs_u,
    seeded_identity_data, solve_reduced_aux, A3Finding, A3Variant,
};
use dslab_core::spinor::{
    apply_gauge, catalog_solution, conservation_residual, dirac_residual, gauge_potential,
    holomorphic_gauge_residual, CatalogParams, CatalogSolution, DiracKind, GaugeFunction,
};
use dslab_core::weierstrass::{
    integrate_surface, max_closedness, one_form_coefficients, path_independence,
    r3_reduction_check, surface_geometry, IntegrationOptions,
};
use dslab_core::{Complex64, ComplexField, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{GridSection, ScenarioConfig, Tolerances};
use crate::io;
use crate::CliError;

pub const MANIFEST: &str = "verify.json";

/// One named comparison against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"below"`: pass when `value < tolerance`; `"at_least"`: pass when
    /// `value >= tolerance`.
    pub kind: &'static str,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            kind: "below",
            pass: value < tolerance,
        }
    }

    fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            kind: "at_least",
            pass: value >= tolerance,
        }
    }
}

/// Grid and measure conventions used by every check.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub storage: &'static str,
    pub d: &'static str,
    pub dbar: &'static str,
    pub area_measure: &'static str,
    pub dz_wedge_dzbar: &'static str,
    pub inverse_gauge: &'static str,
    pub line_integration: &'static str,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            storage: "data[j*nx + i] at z = i*dx + i*j*dy",
            d: "(d_x - i d_y) / 2",
            dbar: "(d_x + i d_y) / 2",
            area_measure: "dx dy",
            dz_wedge_dzbar: "-2i dx dy",
            inverse_gauge: "zero mean",
            line_integration: "spectral",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioFamilyFinding {
    pub family: &'static str,
    pub max_chordal_mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub grid: GridSection,
    pub tolerances: Tolerances,
    pub conventions: Conventions,
    pub a3_variant: A3Variant,
    pub a3_finding: A3Finding,
    pub gauss_map_ratio_families: Vec<RatioFamilyFinding>,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyManifest {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unit-frequency wave on the lattice of `spec`.
fn lattice_wave(spec: &GridSpec) -> CatalogParams {
    let k = 2.0 * PI / spec.lx();
    CatalogParams::Wave {
        c: k,
        k: c(k, 0.0),
        m: c(-k, 0.0),
    }
}

fn lattice_profile(spec: &GridSpec, harmonic: f64) -> CatalogParams {
    CatalogParams::Profile {
        eta0: PI / 8.0,
        amp: 0.4,
        kappa: harmonic * 2.0 * PI / spec.lx(),
    }
}

fn spectral_checks(spec: GridSpec, seed: u64, tol: f64, out: &mut Vec<Check>) {
    let (a, b) = (3.0 * 2.0 * PI / spec.lx(), -2.0 * 2.0 * PI / spec.ly());
    let e = ComplexField::from_fn(spec, |x, y| c(0.0, a * x + b * y).exp());
    let scale = 1.0 + 0.5 * (a * a + b * b).sqrt();
    out.push(Check::below(
        "spectral.d_mode",
        e.d().max_diff(&e.scale(c(0.5 * b, 0.5 * a))) / scale,
        tol,
    ));
    out.push(Check::below(
        "spectral.dbar_mode",
        e.dbar().max_diff(&e.scale(c(-0.5 * b, 0.5 * a))) / scale,
        tol,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ComplexField::random_band_limited(spec, &mut rng, 6, 1.5, 1.0);
    let centered = &f - f.mean();
    let inv = f
        .dbar()
        .solve_dbar(1e-10)
        .map(|g| g.max_diff(&centered))
        .unwrap_or(f64::NAN);
    out.push(Check::below("spectral.inverse_dbar", inv, tol));
    let inv = f
        .d()
        .solve_d(1e-10)
        .map(|g| g.max_diff(&centered))
        .unwrap_or(f64::NAN);
    out.push(Check::below("spectral.inverse_d", inv, tol));
}

fn dirac_max(sol: &CatalogSolution) -> Result<(f64, f64), CliError> {
    Ok((
        dirac_residual(&sol.potential, &sol.psi, DiracKind::D)?.max_abs(),
        dirac_residual(&sol.potential, &sol.phi, DiracKind::Dtilde)?.max_abs(),
    ))
}

fn surface_checks(
    spec: GridSpec,
    t: &Tolerances,
    out: &mut Vec<Check>,
) -> Result<Vec<RatioFamilyFinding>, CliError> {
    let plane = catalog_solution(spec, CatalogParams::Plane)?;
    let (a, b) = dirac_max(&plane)?;
    out.push(Check::below("dirac.plane", a.max(b), t.get(t.dirac)));
    let wave = catalog_solution(spec, lattice_wave(&spec))?;
    let (a, b) = dirac_max(&wave)?;
    out.push(Check::below("dirac.wave_d", a, t.get(t.dirac)));
    out.push(Check::below("dirac.wave_dtilde", b, t.get(t.dirac)));

    let (r1, r2) = conservation_residual(&wave.psi, &wave.phi)?;
    out.push(Check::below(
        "lemma1.conservation",
        r1.max_abs().max(r2.max_abs()),
        t.get(t.closedness),
    ));
    let forms = one_form_coefficients(&wave.psi, &wave.phi)?;
    out.push(Check::below(
        "lemma1.closedness",
        max_closedness(&forms),
        t.get(t.closedness),
    ));
    let opts = IntegrationOptions::default();
    out.push(Check::below(
        "lemma1.path_independence",
        path_independence(&forms, opts.rule),
        t.get(t.path_independence),
    ));

    let surface = integrate_surface(&forms, [0.0; 4], opts)?;
    let geo = surface_geometry(&wave.psi, &wave.phi, &surface, &wave.potential)?;
    out.push(Check::below(
        "geometry.conformality",
        geo.conformality_residual.max_abs(),
        t.get(t.geometry),
    ));
    out.push(Check::below(
        "geometry.metric",
        geo.metric_residual,
        t.get(t.geometry),
    ));
    out.push(Check::below(
        "geometry.curvature",
        geo.curvature_residual,
        t.get(t.curvature),
    ));

    let gauss = gauss_map_of_surface(&surface)?;
    out.push(Check::below(
        "gauss.tangent_parallel",
        gauss.consistency_max,
        t.get(t.gauss_parallel),
    ));
    let families = compare_ratio_families(&gauss, &wave.psi, &wave.phi)
        .into_iter()
        .map(|(f, m)| RatioFamilyFinding {
            family: f.name(),
            max_chordal_mismatch: m,
        })
        .collect();

    // constant gauge, grid level
    let f = GaugeFunction::constant(spec, c(0.4, 0.3));
    let big_p = gauge_potential(&wave.potential, &f)?;
    let (psi, phi) = apply_gauge(&wave.psi, &wave.phi, &f)?;
    let r = dirac_residual(&big_p, &psi, DiracKind::D)?
        .max_abs()
        .max(dirac_residual(&big_p, &phi, DiracKind::Dtilde)?.max_abs());
    out.push(Check::below("gauge.dirac", r, t.get(t.gauge)));
    let forms_g = one_form_coefficients(&psi, &phi)?;
    out.push(Check::below(
        "gauge.forms",
        forms.max_diff(&forms_g) / (1.0 + forms.max_abs()),
        t.get(t.gauge_forms),
    ));
    let surface_g = integrate_surface(&forms_g, [0.0; 4], opts)?;
    let ds = (0..4)
        .map(|k| surface.x[k].max_diff(&surface_g.x[k]))
        .fold(0.0, f64::max);
    out.push(Check::below("gauge.surface", ds, t.get(t.gauge_forms)));
    let points: Vec<Complex64> = (0..spec.ny())
        .step_by(spec.ny().div_ceil(4))
        .flat_map(|j| {
            (0..spec.nx())
                .step_by(spec.nx().div_ceil(4))
                .map(move |i| (i, j))
        })
        .map(|(i, j)| spec.z(i, j))
        .collect();
    let h = holomorphic_gauge_residual(&wave.params, c(0.3, 0.2), c(0.1, -0.05), &points);
    out.push(Check::below(
        "gauge.holomorphic_pointwise",
        h,
        t.get(t.gauge),
    ));

    let prof = catalog_solution(spec, lattice_profile(&spec, 3.0))?;
    let r3 = r3_reduction_check(&prof.potential, &prof.psi, opts)?;
    out.push(Check::below(
        "r3.x4_constant",
        r3.x4_variation,
        t.get(t.r3_x4),
    ));
    out.push(Check::below(
        "r3.integrals",
        r3.max_discrepancy,
        t.get(t.r3),
    ));
    Ok(families)
}

fn identity_checks(
    spec: GridSpec,
    seed: u64,
    variant: A3Variant,
    t: &Tolerances,
    out: &mut Vec<Check>,
) -> Result<A3Finding, CliError> {
    for n in 1..=3u8 {
        let (state, psi) = seeded_identity_data(spec, n, seed)?;
        let r = operator_identity_residual(n, &state, &psi, variant)?.max_abs();
        let tol = if n == 1 {
            t.identity_n1
        } else {
            t.identity_n23
        };
        out.push(Check::below(&format!("identity.n{n}"), r, t.get(tol)));
    }
    let (coarse_g, fine_g) = (
        GridSpec::new(32, 32, spec.lx(), spec.ly())?,
        GridSpec::new(64, 64, spec.lx(), spec.ly())?,
    );
    for n in 1..=3u8 {
        let res = |g: GridSpec| -> Result<f64, CliError> {
            let (state, psi) = seeded_identity_data(g, n, seed)?;
            Ok(operator_identity_residual(n, &state, &psi, A3Variant::V1)?.max_abs())
        };
        let ratio = res(coarse_g)? / res(fine_g)?;
        out.push(Check::at_least(
            &format!("identity.refinement_n{n}"),
            ratio,
            t.get(t.refinement),
        ));
    }
    let (state, psi) = seeded_identity_data(spec, 3, seed)?;
    let finding = resolve_a3_variant(&state, &psi, t.get(t.identity_n23))?;
    let best = finding.printed.min(finding.v1);
    let mut check = Check::below("identity.a3_unique_variant", best, t.get(t.identity_n23));
    check.pass = finding.resolved.is_some();
    out.push(check);
    Ok(finding)
}

fn reduction_checks(
    spec: GridSpec,
    seed: u64,
    t: &Tolerances,
    out: &mut Vec<Check>,
) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let u = ComplexField::random_band_limited(spec, &mut rng, 4, 1.2, 0.4);
    for n in 1..=2u8 {
        out.push(Check::below(
            &format!("reduction.conjugate_pair_n{n}"),
            reduction_defect(n, &u)?,
            t.get(t.reduction),
        ));
    }
    let ur = ComplexField::random_band_limited(spec, &mut rng, 3, 1.0, 0.4).re();
    let aux = solve_reduced_aux(&ur)?;
    out.push(Check::below(
        "reduction.w_half_d_v",
        aux.w.max_diff(&(aux.v.d() * 0.5)),
        t.get(t.reduced_aux),
    ));
    out.push(Check::below(
        "reduction.w_prime_half_dbar_conj_v",
        aux.w_prime.max_diff(&(aux.v.conj().dbar() * 0.5)),
        t.get(t.reduced_aux),
    ));
    out.push(Check::below(
        "reduction.novikov_veselov",
        rhs_u(3, &ur)?.max_diff(&nv_rhs(&ur)?),
        t.get(t.nv),
    ));
    Ok(())
}

fn gauss_checks(seed: u64, t: &Tolerances, out: &mut Vec<Check>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a55);
    let mut cz = || c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let norm2 = |z: &[Complex64; 4]| z.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let (mut quad, mut trip, mut change) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..256 {
        let w = ProductPoint { w1: cz(), w2: cz() };
        let z = sigma(w);
        quad = quad.max(quadric_residual(&z.z).norm() / norm2(&z.z));
        let back = sigma_inverse(&z).map_or(f64::NAN, |b| {
            chordal_distance(b.w1, w.w1).max(chordal_distance(b.w2, w.w2))
        });
        trip = trip.max(back);
        let (y1, y3, y4) = (cz(), cz(), cz());
        let y1 = if y1.norm() < 1e-3 { c(1.0, 0.0) } else { y1 };
        let zc = coordinate_change_y_to_z([y1, y3 * y4 / y1, y3, y4]);
        change = change.max(quadric_residual(&zc).norm() / norm2(&zc));
    }
    out.push(Check::below("gauss.quadric", quad, t.get(t.quadric)));
    out.push(Check::below("gauss.round_trip", trip, t.get(t.round_trip)));
    out.push(Check::below(
        "gauss.coordinate_change",
        change,
        t.get(t.quadric),
    ));
}

fn flow_checks(spec: GridSpec, cfg: &ScenarioConfig, out: &mut Vec<Check>) -> Result<(), CliError> {
    let t = &cfg.tolerances;
    // one harmonic keeps the products resolved on coarse grids
    let prof = catalog_solution(spec, lattice_profile(&spec, 1.0))?;
    let state = DeformationState::new(prof.potential.p, prof.psi, prof.phi)?;
    let mut fc = FlowConfig::new(cfg.flow.n)?;
    fc.variant = cfg.hierarchy.a3_variant;
    fc.dealias = cfg.flow.dealias;
    fc.blowup = cfg.flow.blowup;
    let rep = conservation_report(&run(&state, cfg.flow.dt, 20, &fc, None)?.records)?;
    out.push(Check::below(
        "flow.dirac",
        rep.dirac_residual_max,
        t.get(t.flow_coherence),
    ));
    out.push(Check::below(
        "flow.closedness",
        rep.closedness_max,
        t.get(t.flow_coherence),
    ));
    if cfg.flow.n == 2 {
        out.push(Check::below(
            "flow.willmore_drift",
            rep.w_drift,
            t.get(t.willmore_drift),
        ));
    }
    let j = rep.j_drift.iter().copied().fold(0.0, f64::max);
    out.push(Check::below("flow.j_drift", j, t.get(t.j_drift)));
    Ok(())
}

/// Runs every check; the manifest depends only on the configuration.
pub fn run_suite(cfg: &ScenarioConfig) -> Result<VerifyManifest, CliError> {
    let spec = cfg.grid.spec()?;
    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    spectral_checks(spec, cfg.seed, t.get(t.spectral), &mut checks);
    let families = surface_checks(spec, t, &mut checks)?;
    let finding = identity_checks(spec, cfg.seed, cfg.hierarchy.a3_variant, t, &mut checks)?;
    reduction_checks(spec, cfg.seed, t, &mut checks)?;
    gauss_checks(cfg.seed, t, &mut checks);
    flow_checks(spec, cfg, &mut checks)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(VerifyManifest {
        tool: "dslab",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        grid: cfg.grid,
        tolerances: cfg.tolerances,
        conventions: Conventions::default(),
        a3_variant: cfg.hierarchy.a3_variant,
        a3_finding: finding,
        gauss_map_ratio_families: families,
        failed: checks.len() - passed,
        passed,
        checks,
    })
}

pub fn cmd_verify(cfg: &ScenarioConfig, out: &Path) -> Result<VerifyManifest, CliError> {
    let manifest = run_suite(cfg)?;
    std::fs::create_dir_all(out)?;
    io::write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}
