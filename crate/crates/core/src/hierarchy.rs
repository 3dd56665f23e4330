//! Lax triple `(L, A_n, B_n)` for `n = 1, 2, 3`, auxiliary constraint solves,
//! and the full and reduced right-hand sides of the hierarchy.
//!
//! ```text
//!   L = [[-p, d], [-dbar, q]]
//!   L_t + [L, A_n] - B_n L = 0    with L_t = diag(-p_t, q_t)
//! ```
//!
//! The reduction `p = -u, q = conj(u)` (plus branch) turns `L Psi = 0` into
//! the Dirac equation `D psi = 0` with potential `u`; the minus branch
//! `p = -conj(u), q = u` does the same for `D~ phi = 0`.
//!
//! The `n = 2` operators carry the factor `i` that makes the pair of equations
//! compatible with the reduction.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec, DEFAULT_SOLVABILITY_TOL};
use crate::spinor::SpinorField;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which reduced potential pairing a state uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `p = -u`, `q = conj(u)`.
    Plus,
    /// `p = -conj(u)`, `q = u`.
    Minus,
}

/// Level of the hierarchy and, for reduced flows, the branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowLevel {
    n: u8,
    branch: Branch,
    reduced: bool,
}

impl FlowLevel {
    pub fn new(n: u8, branch: Branch, reduced: bool) -> Result<Self> {
        check_level(n)?;
        Ok(Self { n, branch, reduced })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn reduced(&self) -> bool {
        self.reduced
    }
}

fn check_level(n: u8) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "hierarchy level {n} must be 1, 2 or 3"
        )))
    }
}

/// Top-left entry of `A_3`: `d^3 + (3/2) c d - 3 w1` with `c = v2` as printed
/// or `c = v1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A3Variant {
    Printed,
    #[default]
    V1,
}

impl A3Variant {
    pub fn name(self) -> &'static str {
        match self {
            A3Variant::Printed => "printed",
            A3Variant::V1 => "v1",
        }
    }
}

impl std::str::FromStr for A3Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(A3Variant::Printed),
            "v1" => Ok(A3Variant::V1),
            other => Err(Error::InvalidParameter(format!(
                "unknown A3 variant {other:?} (expected printed or v1)"
            ))),
        }
    }
}

/// Auxiliary fields:
///
/// ```text
///   dbar v1 = -2 d(pq)      d v2 = -2 dbar(pq)
///   dbar w1 = d(p dq)       d w2 = dbar(q dbar p)
/// ```
///
/// All four have zero mean; `w1`, `w2` are only solved for level 3.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFields {
    pub v1: ComplexField,
    pub v2: ComplexField,
    pub w1: Option<ComplexField>,
    pub w2: Option<ComplexField>,
}

impl AuxFields {
    fn w(&self) -> Result<(&ComplexField, &ComplexField)> {
        match (&self.w1, &self.w2) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::MissingAux("w1, w2 are required at level 3".into())),
        }
    }

    /// Largest residual of the defining constraints.
    pub fn residual(&self, p: &ComplexField, q: &ComplexField) -> f64 {
        let pq = p * q;
        let mut r = (self.v1.dbar() + pq.d() * 2.0)
            .max_abs()
            .max((self.v2.d() + pq.dbar() * 2.0).max_abs());
        if let (Some(w1), Some(w2)) = (&self.w1, &self.w2) {
            r = r
                .max((w1.dbar() - (p * &q.d()).d()).max_abs())
                .max((w2.d() - (q * &p.dbar()).dbar()).max_abs());
        }
        r
    }
}

/// Potentials `p`, `q` of `L`, optionally tagged with the reduced field `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    p: ComplexField,
    q: ComplexField,
    reduced: Option<(ComplexField, Branch)>,
    aux: Option<AuxFields>,
}

impl HierarchyState {
    pub fn new(p: ComplexField, q: ComplexField) -> Result<Self> {
        p.spec().ensure_same(q.spec())?;
        p.ensure_finite()?;
        q.ensure_finite()?;
        Ok(Self {
            p,
            q,
            reduced: None,
            aux: None,
        })
    }

    /// Reduced state built from `u` on the given branch.
    pub fn reduced(u: &ComplexField, branch: Branch) -> Result<Self> {
        u.ensure_finite()?;
        let (p, q) = match branch {
            Branch::Plus => (-u, u.conj()),
            Branch::Minus => (-u.conj(), u.clone()),
        };
        Ok(Self {
            p,
            q,
            reduced: Some((u.clone(), branch)),
            aux: None,
        })
    }

    pub fn p(&self) -> &ComplexField {
        &self.p
    }

    pub fn q(&self) -> &ComplexField {
        &self.q
    }

    pub fn spec(&self) -> &GridSpec {
        self.p.spec()
    }

    /// Reduced field and branch, if any.
    pub fn reduction(&self) -> Option<(&ComplexField, Branch)> {
        self.reduced.as_ref().map(|(u, b)| (u, *b))
    }

    pub fn aux(&self) -> Option<&AuxFields> {
        self.aux.as_ref()
    }

    /// Copy with auxiliary fields solved for level `n`.
    pub fn with_aux(&self, n: u8) -> Result<Self> {
        let aux = solve_aux(self, n)?;
        Ok(Self {
            aux: Some(aux),
            ..self.clone()
        })
    }

    fn aux_for(&self, n: u8) -> Result<&AuxFields> {
        let aux = self
            .aux
            .as_ref()
            .ok_or_else(|| Error::MissingAux(format!("level {n} needs solved auxiliary fields")))?;
        if n == 3 {
            aux.w()?;
        }
        Ok(aux)
    }
}

pub fn solve_aux(state: &HierarchyState, n: u8) -> Result<AuxFields> {
    solve_aux_with_tol(state, n, DEFAULT_SOLVABILITY_TOL)
}

pub fn solve_aux_with_tol(state: &HierarchyState, n: u8, tol: f64) -> Result<AuxFields> {
    check_level(n)?;
    let (p, q) = (&state.p, &state.q);
    let pq = p * q;
    let v1 = (pq.d() * -2.0).solve_dbar(tol)?;
    let v2 = (pq.dbar() * -2.0).solve_d(tol)?;
    let (w1, w2) = if n == 3 {
        (
            Some((p * &q.d()).d().solve_dbar(tol)?),
            Some((q * &p.dbar()).dbar().solve_d(tol)?),
        )
    } else {
        (None, None)
    };
    Ok(AuxFields { v1, v2, w1, w2 })
}

type F = ComplexField;

fn d2(f: &F) -> F {
    f.d().d()
}

fn b2(f: &F) -> F {
    f.dbar().dbar()
}

fn d3(f: &F) -> F {
    f.d().d().d()
}

fn b3(f: &F) -> F {
    f.dbar().dbar().dbar()
}

/// `L Psi = (-p psi1 + d psi2, -dbar psi1 + q psi2)`.
pub fn apply_l(state: &HierarchyState, psi: &SpinorField) -> Result<SpinorField> {
    state.spec().ensure_same(psi.spec())?;
    Ok(SpinorField {
        c1: psi.c2.d() - &state.p * &psi.c1,
        c2: &state.q * &psi.c2 - psi.c1.dbar(),
    })
}

/// `A_n Psi` (for `n = 2` the operator `i A_2`).
pub fn apply_a(
    n: u8,
    state: &HierarchyState,
    psi: &SpinorField,
    variant: A3Variant,
) -> Result<SpinorField> {
    check_level(n)?;
    state.spec().ensure_same(psi.spec())?;
    let (p, q) = (&state.p, &state.q);
    let (a, b) = (&psi.c1, &psi.c2);
    match n {
        1 => Ok(SpinorField {
            c1: a.d() + q * b,
            c2: p * a + b.dbar(),
        }),
        2 => {
            let aux = state.aux_for(2)?;
            let r1 = -d2(a) - &aux.v1 * a + q * &b.dbar() - q.dbar() * b;
            let r2 = -(p * &a.d()) + p.d() * a + b2(b) + &aux.v2 * b;
            Ok(SpinorField {
                c1: r1.scale(I),
                c2: r2.scale(I),
            })
        }
        _ => {
            let aux = state.aux_for(3)?;
            let (w1, w2) = aux.w()?;
            let lead = match variant {
                A3Variant::Printed => &aux.v2,
                A3Variant::V1 => &aux.v1,
            };
            let (db, bb) = (b.dbar(), b2(b));
            let (da, dda) = (a.d(), d2(a));
            let c11 = d3(a) + (lead * &da) * 1.5 - (w1 * a) * 3.0;
            let c12 = q * &bb - q.dbar() * &db + b2(q) * b + (&aux.v2 * q * b) * 1.5;
            let c21 = p * &dda - p.d() * &da + d2(p) * a + (&aux.v1 * p * a) * 1.5;
            let c22 = b3(b) + (&aux.v2 * &db) * 1.5 - (w2 * b) * 3.0;
            Ok(SpinorField {
                c1: c11 + c12,
                c2: c21 + c22,
            })
        }
    }
}

/// `B_n Psi` (for `n = 2` the operator `i B_2`).
pub fn apply_b(n: u8, state: &HierarchyState, psi: &SpinorField) -> Result<SpinorField> {
    check_level(n)?;
    state.spec().ensure_same(psi.spec())?;
    let (p, q) = (&state.p, &state.q);
    let (a, b) = (&psi.c1, &psi.c2);
    let s = p + q;
    match n {
        1 => Ok(SpinorField {
            c1: a.dbar() - a.d() - &s * b,
            c2: b.d() - b.dbar() - &s * a,
        }),
        2 => {
            let aux = state.aux_for(2)?;
            let vs = &aux.v1 + &aux.v2;
            let r1 = d2(a) + b2(a) + &vs * a - &s * &b.dbar() + q.dbar() * b - p.dbar() * b * 2.0;
            let r2 = &s * &a.d() - p.d() * a + q.d() * a * 2.0 - d2(b) - b2(b) - &vs * b;
            Ok(SpinorField {
                c1: r1.scale(I),
                c2: r2.scale(I),
            })
        }
        _ => {
            let aux = state.aux_for(3)?;
            let (w1, w2) = aux.w()?;
            let ww = w1 - w2;
            let b11 = |f: &F| {
                b3(f) - d3(f) - (&aux.v1 * &f.d() - &aux.v2 * &f.dbar()) * 1.5 + (&ww * f) * 3.0
            };
            let b12 = -(&s * &b2(b))
                - (&s * &aux.v2 * b) * 1.5
                - (p.dbar() * 3.0 - q.dbar()) * b.dbar()
                - (b2(p) * 3.0 + b2(q)) * b;
            let b21 = -(&s * &d2(a))
                - (&s * &aux.v1 * a) * 1.5
                - (q.d() * 3.0 - p.d()) * a.d()
                - (d2(q) * 3.0 + d2(p)) * a;
            Ok(SpinorField {
                c1: b11(a) + b12,
                c2: b21 - b11(b),
            })
        }
    }
}

/// Right sides `(p_t, q_t)` of the level-`n` equations.
pub fn rhs_pq(n: u8, state: &HierarchyState) -> Result<(ComplexField, ComplexField)> {
    check_level(n)?;
    let solved;
    let aux = match state.aux.as_ref() {
        Some(a) if n < 3 || a.w1.is_some() => a,
        _ => {
            solved = solve_aux(state, n)?;
            &solved
        }
    };
    let (p, q) = (&state.p, &state.q);
    match n {
        1 => Ok((p.d() + p.dbar(), q.d() + q.dbar())),
        2 => {
            let vs = &aux.v1 + &aux.v2;
            let pt = (d2(p) + b2(p) + &vs * p).scale(I);
            let qt = (d2(q) + b2(q) + &vs * q).scale(-I);
            Ok((pt, qt))
        }
        _ => {
            let (w1, w2) = aux.w()?;
            let (v1, v2) = (&aux.v1, &aux.v2);
            let pt = d3(p)
                + b3(p)
                + (v1 * &p.d() + v2 * &p.dbar()) * 1.5
                + (w1 - w2 + v1.d() * 0.5) * p * 3.0;
            let qt = d3(q) + b3(q) + (v1 * &q.d() + v2 * &q.dbar()) * 1.5
                - (w1 - w2 - v2.dbar() * 0.5) * q * 3.0;
            Ok((pt, qt))
        }
    }
}

/// Level-3 right sides in nonlocal form, with `V1 = v1/2`, `V2 = v2/2`:
///
/// ```text
///   p_t = d^3 p + dbar^3 p + 3(V1 dp + V2 dbar p)
///         - 3(d^-1 [dbar(q dbar p)] + dbar^-1 [d(q dp)]) p
///   q_t = d^3 q + dbar^3 q + 3(V1 dq + V2 dbar q)
///         - 3(d^-1 [dbar(p dbar q)] + dbar^-1 [d(p dq)]) q
/// ```
pub fn rhs_pq_nonlocal(state: &HierarchyState) -> Result<(ComplexField, ComplexField)> {
    let tol = DEFAULT_SOLVABILITY_TOL;
    let (p, q) = (&state.p, &state.q);
    let pq = p * q;
    let big_v1 = (-pq.d()).solve_dbar(tol)?;
    let big_v2 = (-pq.dbar()).solve_d(tol)?;
    let nonlocal = |a: &F, b: &F| -> Result<F> {
        Ok((a * &b.dbar()).dbar().solve_d(tol)? + (a * &b.d()).d().solve_dbar(tol)?)
    };
    let pt =
        d3(p) + b3(p) + (&big_v1 * &p.d() + &big_v2 * &p.dbar()) * 3.0 - nonlocal(q, p)? * p * 3.0;
    let qt =
        d3(q) + b3(q) + (&big_v1 * &q.d() + &big_v2 * &q.dbar()) * 3.0 - nonlocal(p, q)? * q * 3.0;
    Ok((pt, qt))
}

/// Auxiliary fields of the reduced equations:
/// `dbar v = d|u|^2`, `dbar w = d(conj(u) du)`, `d w' = dbar(conj(u) dbar u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedAux {
    pub v: ComplexField,
    pub w: ComplexField,
    pub w_prime: ComplexField,
}

pub fn solve_reduced_aux(u: &ComplexField) -> Result<ReducedAux> {
    let tol = DEFAULT_SOLVABILITY_TOL;
    let uc = u.conj();
    Ok(ReducedAux {
        v: u.abs_sqr().d().solve_dbar(tol)?,
        w: (&uc * &u.d()).d().solve_dbar(tol)?,
        w_prime: (&uc * &u.dbar()).dbar().solve_d(tol)?,
    })
}

/// Reduced right side `u_t`:
///
/// ```text
///   n = 1: du + dbar u
///   n = 2: i(d^2 u + dbar^2 u + 2(v + conj(v)) u)
///   n = 3: d^3 u + dbar^3 u + 3(v du + conj(v) dbar u) + 3(w + w') u
/// ```
pub fn rhs_u(n: u8, u: &ComplexField) -> Result<ComplexField> {
    check_level(n)?;
    u.ensure_finite()?;
    match n {
        1 => Ok(u.d() + u.dbar()),
        2 => {
            let v = u.abs_sqr().d().solve_dbar(DEFAULT_SOLVABILITY_TOL)?;
            let vv = &v + &v.conj();
            Ok((d2(u) + b2(u) + (&vv * u) * 2.0).scale(I))
        }
        _ => {
            let aux = solve_reduced_aux(u)?;
            let v = &aux.v;
            Ok(d3(u)
                + b3(u)
                + (v * &u.d() + v.conj() * u.dbar()) * 3.0
                + (&aux.w + &aux.w_prime) * u * 3.0)
        }
    }
}

/// Novikov-Veselov right side for real `u`:
/// `d^3 u + dbar^3 u + 3(v du + conj(v) dbar u) + (3/2)(dv + dbar conj(v)) u`
/// with `dbar v = d(u^2)`.
pub fn nv_rhs(u: &ComplexField) -> Result<ComplexField> {
    u.ensure_finite()?;
    if u.max_abs_imag() > 1e-12 * (1.0 + u.max_abs()) {
        return Err(Error::InvalidParameter("u must be real".into()));
    }
    let v = (u * u).d().solve_dbar(DEFAULT_SOLVABILITY_TOL)?;
    let vc = v.conj();
    Ok(d3(u) + b3(u) + (&v * &u.d() + &vc * &u.dbar()) * 3.0 + ((v.d() + vc.dbar()) * u) * 1.5)
}

/// Residual `[L, d_t - A_n] Psi + B_n L Psi` with `d_t L = diag(-p_t, q_t)`.
///
/// The state must carry auxiliary fields for level `n` when `n >= 2`.
pub fn operator_identity_residual(
    n: u8,
    state: &HierarchyState,
    psi: &SpinorField,
    variant: A3Variant,
) -> Result<SpinorField> {
    check_level(n)?;
    let (pt, qt) = rhs_pq(n, state)?;
    let a_psi = apply_a(n, state, psi, variant)?;
    let l_psi = apply_l(state, psi)?;
    let la = apply_l(state, &a_psi)?;
    let al = apply_a(n, state, &l_psi, variant)?;
    let bl = apply_b(n, state, &l_psi)?;
    Ok(SpinorField {
        c1: (pt * &psi.c1) - la.c1 + al.c1 + bl.c1,
        c2: -(qt * &psi.c2) - la.c2 + al.c2 + bl.c2,
    })
}

/// Residuals of both `A_3` variants on one data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A3Finding {
    pub printed: f64,
    pub v1: f64,
    pub tolerance: f64,
    /// The variant passing the tolerance, if exactly one does.
    pub resolved: Option<A3Variant>,
}

/// Evaluates the level-3 identity with each `A_3` variant.
pub fn resolve_a3_variant(
    state: &HierarchyState,
    psi: &SpinorField,
    tolerance: f64,
) -> Result<A3Finding> {
    let state = state.with_aux(3)?;
    let printed = operator_identity_residual(3, &state, psi, A3Variant::Printed)?.max_abs();
    let v1 = operator_identity_residual(3, &state, psi, A3Variant::V1)?.max_abs();
    let resolved = match (printed < tolerance, v1 < tolerance) {
        (true, false) => Some(A3Variant::Printed),
        (false, true) => Some(A3Variant::V1),
        _ => None,
    };
    Ok(A3Finding {
        printed,
        v1,
        tolerance,
        resolved,
    })
}

/// Conjugate-pair defect of the reduced right sides on the plus branch:
/// `max |q_t - conj(-p_t)|`.
pub fn reduction_defect(n: u8, u: &ComplexField) -> Result<f64> {
    let state = HierarchyState::reduced(u, Branch::Plus)?;
    let (pt, qt) = rhs_pq(n, &state)?;
    Ok(qt.max_diff(&(-pt).conj()))
}

/// Mode cutoff and Gaussian width of the seeded test ensemble for level `n`.
pub fn identity_envelope(n: u8) -> (i64, f64) {
    match n {
        1 => (10, 1.5),
        2 => (6, 1.3),
        _ => (6, 1.2),
    }
}

/// Seeded random `p, q` (with aux fields for level `n`) and `Psi` for the
/// operator identity. Amplitude 0.3, envelope from [`identity_envelope`];
/// the same seed gives the same modes on every grid.
pub fn seeded_identity_data(
    spec: GridSpec,
    n: u8,
    seed: u64,
) -> Result<(HierarchyState, SpinorField)> {
    check_level(n)?;
    let (kmax, sigma) = identity_envelope(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = || ComplexField::random_band_limited(spec, &mut rng, kmax, sigma, 0.3);
    let state = HierarchyState::new(f(), f())?.with_aux(n)?;
    let psi = SpinorField::new(f(), f())?;
    Ok((state, psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_data(n: usize, seed: u64, kmax: i64, sigma: f64) -> (HierarchyState, SpinorField) {
        let g = grid(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = || ComplexField::random_band_limited(g, &mut rng, kmax, sigma, 0.3);
        let state = HierarchyState::new(f(), f()).unwrap();
        let psi = SpinorField::new(f(), f()).unwrap();
        (state, psi)
    }

    #[test]
    fn zero_potential_gives_zero_aux() {
        let g = grid(16);
        let z = ComplexField::zeros(g);
        let s = HierarchyState::new(z.clone(), z).unwrap();
        let aux = solve_aux(&s, 3).unwrap();
        for f in [
            &aux.v1,
            &aux.v2,
            aux.w1.as_ref().unwrap(),
            aux.w2.as_ref().unwrap(),
        ] {
            assert_eq!(f.max_abs(), 0.0);
        }
    }

    #[test]
    fn single_mode_aux() {
        let g = grid(32);
        let u = ComplexField::from_fn(g, |x, _| c(0.0, x).exp());
        let s = HierarchyState::reduced(&u, Branch::Plus).unwrap();
        let aux = solve_aux(&s, 3).unwrap();
        let pdq = s.p() * &s.q().d();
        assert!(pdq.max_diff(&ComplexField::constant(g, c(0.0, 0.5))) < 1e-14);
        assert!(aux.v1.max_abs() < 1e-14 && aux.v2.max_abs() < 1e-14);
        assert!(aux.w1.as_ref().unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn aux_residual_audit() {
        let (s, _) = random_data(64, 3, 4, 1.5);
        let aux = solve_aux(&s, 3).unwrap();
        assert!(aux.residual(s.p(), s.q()) < 1e-10);
        for f in [
            &aux.v1,
            &aux.v2,
            aux.w1.as_ref().unwrap(),
            aux.w2.as_ref().unwrap(),
        ] {
            assert!(f.mean().norm() < 1e-14);
        }
    }

    #[test]
    fn l_examples() {
        let g = grid(16);
        let one = ComplexField::constant(g, c(1.0, 0.0));
        let zero = ComplexField::zeros(g);
        let s = HierarchyState::new(one.clone(), zero.clone()).unwrap();
        let psi = SpinorField::new(one.clone(), zero.clone()).unwrap();
        let r = apply_l(&s, &psi).unwrap();
        assert!(r.c1.max_diff(&(-&one)) < 1e-15 && r.c2.max_abs() < 1e-15);
    }

    #[test]
    fn l_annihilates_reduced_catalog_spinors() {
        use crate::spinor::{catalog_solution, CatalogParams};
        let sol = catalog_solution(grid(64), CatalogParams::default_wave()).unwrap();
        let u = &sol.potential.p;
        let plus = HierarchyState::reduced(u, Branch::Plus).unwrap();
        let minus = HierarchyState::reduced(u, Branch::Minus).unwrap();
        assert!(apply_l(&plus, &sol.psi).unwrap().max_abs() < 1e-10);
        assert!(apply_l(&minus, &sol.phi).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn a_and_b_examples() {
        let g = grid(32);
        let (pc, qc) = (c(0.3, -0.2), c(-1.1, 0.5));
        let (a0, b0) = (c(0.7, 0.1), c(0.2, 0.9));
        let s = HierarchyState::new(ComplexField::constant(g, pc), ComplexField::constant(g, qc))
            .unwrap();
        let psi = SpinorField::constant(g, a0, b0);
        let r = apply_a(1, &s, &psi, A3Variant::V1).unwrap();
        assert!((r.c1.get(2, 3) - qc * b0).norm() < 1e-14);
        assert!((r.c2.get(2, 3) - pc * a0).norm() < 1e-14);

        // u = c real and constant spinors are a fixed point of level 2
        let u = ComplexField::constant(g, c(0.8, 0.0));
        let s = HierarchyState::reduced(&u, Branch::Plus)
            .unwrap()
            .with_aux(2)
            .unwrap();
        assert!(apply_a(2, &s, &psi, A3Variant::V1).unwrap().max_abs() < 1e-14);

        let zero = ComplexField::zeros(g);
        let s0 = HierarchyState::new(zero.clone(), zero)
            .unwrap()
            .with_aux(3)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut f = || ComplexField::random_band_limited(g, &mut rng, 3, 1.0, 1.0);
        let psi = SpinorField::new(f(), f()).unwrap();
        let r = apply_a(3, &s0, &psi, A3Variant::V1).unwrap();
        assert!(r.c1.max_diff(&d3(&psi.c1)) < 1e-12 && r.c2.max_diff(&b3(&psi.c2)) < 1e-12);

        let r = apply_b(1, &s0, &SpinorField::constant(g, a0, b0)).unwrap();
        assert!(r.max_abs() < 1e-14);
        let lap = |f: &F| d2(f) + b2(f);
        let r = apply_b(2, &s0, &psi).unwrap();
        assert!(r.c1.max_diff(&lap(&psi.c1).scale(I)) < 1e-12);
        assert!(r.c2.max_diff(&lap(&psi.c2).scale(-I)) < 1e-12);
        let r = apply_b(3, &s0, &psi).unwrap();
        assert!(r.c1.max_diff(&(b3(&psi.c1) - d3(&psi.c1))) < 1e-12);
        assert!(r.c2.max_diff(&(d3(&psi.c2) - b3(&psi.c2))) < 1e-12);
    }

    #[test]
    fn missing_aux_is_an_error() {
        let (s, psi) = random_data(16, 1, 2, 1.0);
        assert!(matches!(
            apply_a(2, &s, &psi, A3Variant::V1),
            Err(Error::MissingAux(_))
        ));
        let s2 = s.with_aux(2).unwrap();
        assert!(matches!(apply_b(3, &s2, &psi), Err(Error::MissingAux(_))));
        assert!(apply_a(1, &s, &psi, A3Variant::V1).is_ok());
        assert!(apply_a(4, &s, &psi, A3Variant::V1).is_err());
    }

    #[test]
    fn rhs_examples() {
        let g = grid(32);
        let e = ComplexField::from_fn(g, |x, _| c(0.0, x).exp());
        let s = HierarchyState::new(e.clone(), e.clone()).unwrap();
        let (pt, _) = rhs_pq(1, &s).unwrap();
        assert!(pt.max_diff(&e.scale(I)) < 1e-13);
        assert!(rhs_u(1, &e).unwrap().max_diff(&e.scale(I)) < 1e-13);

        let u = ComplexField::constant(g, c(0.6, 0.0));
        assert!(rhs_u(2, &u).unwrap().max_abs() < 1e-14);
        let s = HierarchyState::reduced(&u, Branch::Plus).unwrap();
        let (pt, qt) = rhs_pq(2, &s).unwrap();
        assert!(pt.max_abs() < 1e-14 && qt.max_abs() < 1e-14);

        let zero = ComplexField::zeros(g);
        let s = HierarchyState::new(zero.clone(), zero).unwrap();
        let (pt, qt) = rhs_pq(3, &s).unwrap();
        assert_eq!(pt.max_abs() + qt.max_abs(), 0.0);
    }

    #[test]
    fn zero_potential_identity_is_exact() {
        let g = grid(32);
        let zero = ComplexField::zeros(g);
        let s = HierarchyState::new(zero.clone(), zero)
            .unwrap()
            .with_aux(3)
            .unwrap();
        let (_, psi) = random_data(32, 5, 4, 1.5);
        for n in 1..=3 {
            let r = operator_identity_residual(n, &s, &psi, A3Variant::V1).unwrap();
            assert!(r.max_abs() < 1e-12, "n={n}: {}", r.max_abs());
        }
    }

    #[test]
    fn identities_hold_on_random_data() {
        for (n, kmax, sigma) in [(1u8, 10, 1.5), (2, 6, 1.3), (3, 6, 1.2)] {
            let (s, psi) = random_data(64, 11, kmax, sigma);
            let s = s.with_aux(n).unwrap();
            let r = operator_identity_residual(n, &s, &psi, A3Variant::V1).unwrap();
            assert!(r.max_abs() < 1e-7, "n={n}: {:e}", r.max_abs());
        }
    }

    #[test]
    fn printed_a3_fails_and_v1_passes() {
        let (s, psi) = random_data(32, 21, 6, 1.2);
        let f = resolve_a3_variant(&s, &psi, 1e-7).unwrap();
        assert_eq!(f.resolved, Some(A3Variant::V1), "{f:?}");
        assert!(f.printed > 1e-3);
    }

    #[test]
    fn nonlocal_level_three_agrees() {
        let (s, _) = random_data(64, 8, 5, 1.3);
        let (pt, qt) = rhs_pq(3, &s).unwrap();
        let (pn, qn) = rhs_pq_nonlocal(&s).unwrap();
        assert!(pt.max_diff(&pn) < 1e-9 && qt.max_diff(&qn) < 1e-9);
    }

    #[test]
    fn reductions_are_compatible() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = ComplexField::random_band_limited(g, &mut rng, 4, 1.2, 0.4);
        for n in 1..=3 {
            assert!(reduction_defect(n, &u).unwrap() < 1e-12);
            let s = HierarchyState::reduced(&u, Branch::Plus).unwrap();
            let (pt, _) = rhs_pq(n, &s).unwrap();
            assert!(rhs_u(n, &u).unwrap().max_diff(&(-pt)) < 1e-11, "n={n}");
        }
    }

    #[test]
    fn real_reduction_matches_novikov_veselov() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = ComplexField::random_band_limited(g, &mut rng, 3, 1.0, 0.4).re();
        let aux = solve_reduced_aux(&u).unwrap();
        assert!(aux.w.max_diff(&(aux.v.d() * 0.5)) < 1e-10);
        assert!(aux.w_prime.max_diff(&(aux.v.conj().dbar() * 0.5)) < 1e-10);
        assert!(rhs_u(3, &u).unwrap().max_diff(&nv_rhs(&u).unwrap()) < 1e-9);
        assert!(nv_rhs(&u.scale(I)).is_err());
    }

    #[test]
    fn seeded_data_is_reproducible() {
        let (a, pa) = seeded_identity_data(grid(16), 2, 5).unwrap();
        let (b, pb) = seeded_identity_data(grid(16), 2, 5).unwrap();
        assert_eq!(a.p(), b.p());
        assert_eq!(pa, pb);
        assert!(a.aux().is_some());
        assert!(seeded_identity_data(grid(16), 4, 5).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("printed".parse::<A3Variant>().unwrap(), A3Variant::Printed);
        assert_eq!("v1".parse::<A3Variant>().unwrap(), A3Variant::V1);
        assert!("v2".parse::<A3Variant>().is_err());
        assert!(FlowLevel::new(0, Branch::Plus, true).is_err());
    }
}
