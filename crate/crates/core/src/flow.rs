//! Coupled deformation of `(u, psi, phi)` under a level of the hierarchy,
//! with the conserved functionals `J(h)` and the Willmore energy.
//!
//! `u` evolves by the reduced equation of level `n`; `psi` by the plus-branch
//! operator and `phi` by the minus-branch operator:
//!
//! ```text
//!   n = 1, 3:  psi_t = A_n+ psi        phi_t = A_n- phi
//!   n = 2:     psi_t = i A_2+ psi      phi_t = -i A_2- phi
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Measure};
use crate::hierarchy::{apply_a, rhs_u, A3Variant, Branch, HierarchyState};
use crate::spinor::{dirac_residual, DiracKind, SpinorField, SurfacePotential};
use crate::weierstrass::{max_closedness, one_form_coefficients};

/// Default blow-up threshold on `max |field|`.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Time, potential and both spinors.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationState {
    pub t: f64,
    pub u: ComplexField,
    pub psi: SpinorField,
    pub phi: SpinorField,
}

impl DeformationState {
    pub fn new(u: ComplexField, psi: SpinorField, phi: SpinorField) -> Result<Self> {
        u.spec().ensure_same(psi.spec())?;
        u.spec().ensure_same(phi.spec())?;
        u.ensure_finite()?;
        Ok(Self {
            t: 0.0,
            u,
            psi,
            phi,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .max_abs()
            .max(self.psi.max_abs())
            .max(self.phi.max_abs())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.u
            .max_diff(&other.u)
            .max(self.psi.max_diff(&other.psi))
            .max(self.phi.max_diff(&other.phi))
    }

    fn axpy(&self, s: f64, k: &Rates) -> Self {
        let c = Complex64::new(s, 0.0);
        Self {
            t: self.t,
            u: &self.u + &k.u.scale(c),
            psi: self.psi.axpy(c, &k.psi),
            phi: self.phi.axpy(c, &k.phi),
        }
    }

    /// Largest Dirac residual of `psi` (operator `D`) and `phi` (operator
    /// `D~`) against the potential `u`.
    pub fn dirac_residual(&self) -> f64 {
        let p = SurfacePotential { p: self.u.clone() };
        let a = dirac_residual(&p, &self.psi, DiracKind::D).expect("shared grid");
        let b = dirac_residual(&p, &self.phi, DiracKind::Dtilde).expect("shared grid");
        a.max_abs().max(b.max_abs())
    }

    pub fn closedness(&self) -> f64 {
        max_closedness(&one_form_coefficients(&self.psi, &self.phi).expect("shared grid"))
    }
}

/// Settings of a deformation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Hierarchy level, 1 to 3.
    pub n: u8,
    pub variant: A3Variant,
    /// Apply the two-thirds rule to every stage rate.
    pub dealias: bool,
    pub blowup: f64,
}

impl FlowConfig {
    pub fn new(n: u8) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "flow level {n} must be 1, 2 or 3"
            )));
        }
        Ok(Self {
            n,
            variant: A3Variant::default(),
            dealias: false,
            blowup: BLOWUP_THRESHOLD,
        })
    }
}

struct Rates {
    u: ComplexField,
    psi: SpinorField,
    phi: SpinorField,
}

fn rates(s: &DeformationState, cfg: &FlowConfig) -> Result<Rates> {
    let n = cfg.n;
    let plus = HierarchyState::reduced(&s.u, Branch::Plus)?.with_aux(n)?;
    let minus = HierarchyState::reduced(&s.u, Branch::Minus)?.with_aux(n)?;
    let u = rhs_u(n, &s.u)?;
    let psi = apply_a(n, &plus, &s.psi, cfg.variant)?;
    let mut phi = apply_a(n, &minus, &s.phi, cfg.variant)?;
    if n == 2 {
        phi = phi.map(|c| -c);
    }
    let mut r = Rates { u, psi, phi };
    if cfg.dealias {
        r = Rates {
            u: r.u.dealias(),
            psi: r.psi.map(ComplexField::dealias),
            phi: r.phi.map(ComplexField::dealias),
        };
    }
    Ok(r)
}

/// One classical fourth-order Runge-Kutta step.
pub fn step(state: &DeformationState, dt: f64, cfg: &FlowConfig) -> Result<DeformationState> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} must be nonnegative"
        )));
    }
    let k1 = rates(state, cfg)?;
    let k2 = rates(&state.axpy(0.5 * dt, &k1), cfg)?;
    let k3 = rates(&state.axpy(0.5 * dt, &k2), cfg)?;
    let k4 = rates(&state.axpy(dt, &k3), cfg)?;
    let mut next = state
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    next.t = state.t + dt;
    let max = next.max_abs();
    if !(max <= cfg.blowup) {
        return Err(Error::BlowUp { t: next.t, max });
    }
    Ok(next)
}

/// Integrand of `J(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    Psi1barPhi1bar,
    Psi1barPhi2,
    Psi2Phi1bar,
    Psi2Phi2,
}

impl HKind {
    pub const ALL: [HKind; 4] = [
        HKind::Psi1barPhi1bar,
        HKind::Psi1barPhi2,
        HKind::Psi2Phi1bar,
        HKind::Psi2Phi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HKind::Psi1barPhi1bar => "psi1bar_phi1bar",
            HKind::Psi1barPhi2 => "psi1bar_phi2",
            HKind::Psi2Phi1bar => "psi2_phi1bar",
            HKind::Psi2Phi2 => "psi2_phi2",
        }
    }
}

/// `J(h) = int h dz ^ dzbar`.
pub fn functional_j(kind: HKind, psi: &SpinorField, phi: &SpinorField) -> Result<Complex64> {
    psi.spec().ensure_same(phi.spec())?;
    let h = match kind {
        HKind::Psi1barPhi1bar => psi.c1.conj() * phi.c1.conj(),
        HKind::Psi1barPhi2 => psi.c1.conj() * &phi.c2,
        HKind::Psi2Phi1bar => &psi.c2 * &phi.c1.conj(),
        HKind::Psi2Phi2 => &psi.c2 * &phi.c2,
    };
    Ok(h.integrate(Measure::DzWedgeDzbar))
}

/// Willmore energy `int |u|^2 dx dy`.
pub fn willmore(u: &ComplexField) -> f64 {
    u.abs_sqr().integrate(Measure::DxDy).re
}

/// Diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "J")]
    pub j: [Complex64; 4],
    pub dirac_residual_max: f64,
    pub closedness_max: f64,
}

impl DiagnosticsRecord {
    pub fn of(state: &DeformationState) -> Self {
        Self {
            t: state.t,
            w: willmore(&state.u),
            j: HKind::ALL.map(|k| functional_j(k, &state.psi, &state.phi).expect("shared grid")),
            dirac_residual_max: state.dirac_residual(),
            closedness_max: state.closedness(),
        }
    }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: DeformationState,
    /// `(step index, state)` every `snapshot_stride` steps, including step 0.
    pub snapshots: Vec<(usize, DeformationState)>,
}

/// Runs `steps` steps of size `dt`, recording diagnostics of the initial
/// state and after every step.
pub fn run(
    initial: &DeformationState,
    dt: f64,
    steps: usize,
    cfg: &FlowConfig,
    snapshot_stride: Option<usize>,
) -> Result<RunOutput> {
    let mut state = initial.clone();
    let mut records = vec![DiagnosticsRecord::of(&state)];
    let mut snapshots = Vec::new();
    let keep = |k: usize| snapshot_stride.is_some_and(|s| s > 0 && k.is_multiple_of(s));
    if keep(0) {
        snapshots.push((0, state.clone()));
    }
    for k in 1..=steps {
        state = step(&state, dt, cfg).map_err(|e| match e {
            Error::BlowUp { t, max } => Error::Diverged { step: k, t, max },
            other => other,
        })?;
        records.push(DiagnosticsRecord::of(&state));
        if keep(k) {
            snapshots.push((k, state.clone()));
        }
    }
    Ok(RunOutput {
        records,
        final_state: state,
        snapshots,
    })
}

/// Largest drifts over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// `max |W(t) - W(0)| / W(0)` (absolute when `W(0) = 0`).
    pub w_drift: f64,
    /// `max |J(t) - J(0)| / (1 + |J(0)|)` per kind.
    pub j_drift: [f64; 4],
    pub dirac_residual_max: f64,
    pub closedness_max: f64,
}

pub fn conservation_report(records: &[DiagnosticsRecord]) -> Result<ConservationReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidParameter("no diagnostics records".into()))?;
    let wscale = if first.w > 0.0 { first.w } else { 1.0 };
    let mut rep = ConservationReport {
        w_drift: 0.0,
        j_drift: [0.0; 4],
        dirac_residual_max: 0.0,
        closedness_max: 0.0,
    };
    for r in records {
        rep.w_drift = rep.w_drift.max((r.w - first.w).abs() / wscale);
        for k in 0..4 {
            let d = (r.j[k] - first.j[k]).norm() / (1.0 + first.j[k].norm());
            rep.j_drift[k] = rep.j_drift[k].max(d);
        }
        rep.dirac_residual_max = rep.dirac_residual_max.max(r.dirac_residual_max);
        rep.closedness_max = rep.closedness_max.max(r.closedness_max);
    }
    Ok(rep)
}

/// Drift ratios `coarse / fine` of two runs differing in `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReduction {
    pub w: Option<f64>,
    pub j: [Option<f64>; 4],
}

/// Drifts below this floor are roundoff and give no ratio.
pub const DRIFT_FLOOR: f64 = 1e-14;

pub fn drift_reduction(coarse: &ConservationReport, fine: &ConservationReport) -> DriftReduction {
    let ratio = |a: f64, b: f64| {
        if a <= DRIFT_FLOOR || b <= DRIFT_FLOOR {
            None
        } else {
            Some(a / b)
        }
    };
    DriftReduction {
        w: ratio(coarse.w_drift, fine.w_drift),
        j: std::array::from_fn(|k| ratio(coarse.j_drift[k], fine.j_drift[k])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spinor::{catalog_solution, CatalogParams};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_catalog(n: usize, params: CatalogParams) -> DeformationState {
        let sol = catalog_solution(GridSpec::square(n).unwrap(), params).unwrap();
        DeformationState::new(sol.potential.p, sol.psi, sol.phi).unwrap()
    }

    fn fixed_point(g: GridSpec) -> DeformationState {
        DeformationState::new(
            ComplexField::constant(g, c(0.7, 0.0)),
            SpinorField::constant(g, c(1.0, 0.5), c(-0.2, 0.3)),
            SpinorField::constant(g, c(0.4, 0.0), c(0.0, 1.0)),
        )
        .unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let s = from_catalog(16, CatalogParams::default_wave());
        let cfg = FlowConfig::new(2).unwrap();
        let next = step(&s, 0.0, &cfg).unwrap();
        assert_eq!(next, s);
        let next = step(&s, 0.01, &cfg).unwrap();
        assert!((next.t - 0.01).abs() < 1e-16);
        assert!(step(&s, -1.0, &cfg).is_err());
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        let s = fixed_point(GridSpec::square(16).unwrap());
        let cfg = FlowConfig::new(2).unwrap();
        let out = run(&s, 1e-2, 5, &cfg, None).unwrap();
        assert!(out.final_state.max_diff(&s) < 1e-12);
        let rep = conservation_report(&out.records).unwrap();
        assert!(rep.w_drift < 1e-12 && rep.j_drift.iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn zero_steps_give_one_record() {
        let s = fixed_point(GridSpec::square(16).unwrap());
        let out = run(&s, 1e-2, 0, &FlowConfig::new(1).unwrap(), Some(1)).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.snapshots.len(), 1);
    }

    #[test]
    fn level_one_mode_rotates() {
        let g = GridSpec::square(32).unwrap();
        let u0 = ComplexField::from_fn(g, |x, _| c(0.0, x).exp());
        let s = DeformationState::new(
            u0.clone(),
            SpinorField::constant(g, c(1.0, 0.0), c(0.0, 0.0)),
            SpinorField::constant(g, c(1.0, 0.0), c(0.0, 0.0)),
        )
        .unwrap();
        let out = run(&s, 1e-2, 10, &FlowConfig::new(1).unwrap(), None).unwrap();
        let t = out.final_state.t;
        assert!(out.final_state.u.max_diff(&u0.scale(c(0.0, t).exp())) < 1e-8);
    }

    #[test]
    fn functionals() {
        let g = GridSpec::square(16).unwrap();
        let one = SpinorField::constant(g, c(1.0, 0.0), c(0.0, 0.0));
        let j = functional_j(HKind::Psi1barPhi1bar, &one, &one).unwrap();
        assert!((j - c(0.0, -8.0 * PI * PI)).norm() < 1e-12);
        assert_eq!(
            functional_j(HKind::Psi2Phi2, &one, &one).unwrap().norm(),
            0.0
        );
        let area = 4.0 * PI * PI;
        assert!((willmore(&ComplexField::constant(g, c(1.0, 0.0))) - area).abs() < 1e-12);
        assert!((willmore(&ComplexField::from_fn(g, |x, _| c(0.0, x).exp())) - area).abs() < 1e-12);
        assert_eq!(willmore(&ComplexField::zeros(g)), 0.0);
    }

    #[test]
    fn identical_records_have_no_drift() {
        let s = from_catalog(16, CatalogParams::default_wave());
        let r = DiagnosticsRecord::of(&s);
        let rep = conservation_report(&[r, r, r]).unwrap();
        assert_eq!(rep.w_drift, 0.0);
        assert_eq!(rep.j_drift, [0.0; 4]);
        assert!(conservation_report(&[]).is_err());
    }

    #[test]
    fn blowup_is_reported_with_step() {
        let s = from_catalog(16, CatalogParams::default_wave());
        let mut cfg = FlowConfig::new(2).unwrap();
        cfg.blowup = 0.5;
        assert!(matches!(
            run(&s, 1e-3, 3, &cfg, None),
            Err(Error::Diverged { step: 1, .. })
        ));
    }

    #[test]
    fn profile_flow_keeps_dirac_equations() {
        let s = from_catalog(
            64,
            CatalogParams::Profile {
                eta0: PI / 8.0,
                amp: 0.4,
                kappa: 2.0,
            },
        );
        for n in 1..=3 {
            let out = run(&s, 2.5e-4, 20, &FlowConfig::new(n).unwrap(), None).unwrap();
            let rep = conservation_report(&out.records).unwrap();
            assert!(rep.dirac_residual_max < 1e-8, "n={n}: {rep:?}");
            assert!(rep.closedness_max < 1e-8, "n={n}: {rep:?}");
        }
    }
}
