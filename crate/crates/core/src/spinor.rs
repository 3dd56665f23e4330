//! Spinor fields, the two Dirac operators with potential `p`, exact solutions,
//! lifts from angle data and gauge transformations.
//!
//! ```text
//!   D  psi = ( p psi1 + d psi2,   -dbar psi1 + conj(p) psi2 )
//!   D~ phi = ( conj(p) phi1 + d phi2,   -dbar phi1 + p phi2 )
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, GridSpec, DEFAULT_SOLVABILITY_TOL};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two-component spinor on a grid (`psi` or `phi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinorField {
    pub c1: ComplexField,
    pub c2: ComplexField,
}

impl SpinorField {
    pub fn new(c1: ComplexField, c2: ComplexField) -> Result<Self> {
        c1.spec().ensure_same(c2.spec())?;
        Ok(Self { c1, c2 })
    }

    pub fn constant(spec: GridSpec, a: Complex64, b: Complex64) -> Self {
        Self {
            c1: ComplexField::constant(spec, a),
            c2: ComplexField::constant(spec, b),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.c1.spec()
    }

    pub fn max_abs(&self) -> f64 {
        self.c1.max_abs().max(self.c2.max_abs())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.c1.max_diff(&other.c1).max(self.c2.max_diff(&other.c2))
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    /// Applies `f` to both components.
    pub fn map(&self, f: impl Fn(&ComplexField) -> ComplexField) -> Self {
        Self {
            c1: f(&self.c1),
            c2: f(&self.c2),
        }
    }

    /// Componentwise `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Self {
        Self {
            c1: &self.c1 + &other.c1.scale(s),
            c2: &self.c2 + &other.c2.scale(s),
        }
    }

    /// Two CSV blocks, `c1` then `c2`, each in the [`ComplexField`] layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (name, c) in [("c1", &self.c1), ("c2", &self.c2)] {
            out.push_str(&format!("# {name}\n"));
            out.push_str(&c.to_csv());
        }
        out
    }
}

/// Potential `p` of the Dirac operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePotential {
    pub p: ComplexField,
}

impl SurfacePotential {
    pub fn new(p: ComplexField) -> Result<Self> {
        p.ensure_finite()?;
        Ok(Self { p })
    }

    pub fn spec(&self) -> &GridSpec {
        self.p.spec()
    }
}

/// Gauge function `f` acting as `psi -> (e^f psi1, e^conj(f) psi2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFunction {
    pub f: ComplexField,
}

impl GaugeFunction {
    pub fn new(f: ComplexField) -> Result<Self> {
        f.ensure_finite()?;
        Ok(Self { f })
    }

    pub fn constant(spec: GridSpec, c: Complex64) -> Self {
        Self {
            f: ComplexField::constant(spec, c),
        }
    }
}

/// Real angle fields `(theta, eta)` defining a lift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftAngles {
    theta: ComplexField,
    eta: ComplexField,
}

/// Largest tolerated out-of-band spectral fraction for lift angles.
pub const LIFT_RESOLUTION_TOL: f64 = 1e-8;

impl LiftAngles {
    /// Validates that both angles are real, smooth and periodic on the grid.
    pub fn new(theta: ComplexField, eta: ComplexField) -> Result<Self> {
        theta.spec().ensure_same(eta.spec())?;
        for (name, a) in [("theta", &theta), ("eta", &eta)] {
            a.ensure_finite()?;
            let scale = 1.0 + a.max_abs();
            if a.max_abs_imag() > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!("{name} must be real")));
            }
            let tail = a.spectral_tail();
            if tail > LIFT_RESOLUTION_TOL {
                return Err(Error::Unresolved(format!(
                    "{name} is not a smooth periodic field (spectral tail {tail:.2e})"
                )));
            }
        }
        Ok(Self {
            theta: theta.re(),
            eta: eta.re(),
        })
    }

    pub fn theta(&self) -> &ComplexField {
        &self.theta
    }

    pub fn eta(&self) -> &ComplexField {
        &self.eta
    }
}

/// Which Dirac operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiracKind {
    D,
    Dtilde,
}

pub fn dirac_residual(
    p: &SurfacePotential,
    s: &SpinorField,
    which: DiracKind,
) -> Result<SpinorField> {
    p.spec().ensure_same(s.spec())?;
    let pc = p.p.conj();
    let (top, bottom) = match which {
        DiracKind::D => (&p.p, &pc),
        DiracKind::Dtilde => (&pc, &p.p),
    };
    Ok(SpinorField {
        c1: top * &s.c1 + s.c2.d(),
        c2: bottom * &s.c2 - s.c1.dbar(),
    })
}

/// Gauge transformation with a gauge field `g`.
pub fn apply_gauge(
    psi: &SpinorField,
    phi: &SpinorField,
    g: &GaugeFunction,
) -> Result<(SpinorField, SpinorField)> {
    psi.spec().ensure_same(phi.spec())?;
    psi.spec().ensure_same(g.f.spec())?;
    let ef = g.f.exp();
    let efc = g.f.conj().exp();
    let emf = (-&g.f).exp();
    let emfc = (-g.f.conj()).exp();
    Ok((
        SpinorField {
            c1: &ef * &psi.c1,
            c2: &efc * &psi.c2,
        },
        SpinorField {
            c1: &emf * &phi.c1,
            c2: &emfc * &phi.c2,
        },
    ))
}

/// Tolerance on `max |dbar f|` relative to `1 + max |f|`.
pub const HOLOMORPHIC_TOL: f64 = 1e-10;

/// Transformed potential `p e^{conj(f) - f}` for a holomorphic gauge.
pub fn gauge_potential(p: &SurfacePotential, g: &GaugeFunction) -> Result<SurfacePotential> {
    p.spec().ensure_same(g.f.spec())?;
    let defect = g.f.dbar().max_abs();
    if defect > HOLOMORPHIC_TOL * (1.0 + g.f.max_abs()) {
        return Err(Error::NotHolomorphic(defect));
    }
    let phase = (g.f.conj() - &g.f).exp();
    Ok(SurfacePotential { p: &p.p * &phase })
}

/// Lift output: gauge `f`, potential `p` and spinor `psi`.
#[derive(Debug, Clone)]
pub struct Lift {
    pub gauge: GaugeFunction,
    pub potential: SurfacePotential,
    pub psi: SpinorField,
}

/// Builds `(f, p, psi)` from angle data:
///
/// ```text
///   dbar f = -i (dbar theta) cos^2 eta
///   p      = -e^{conj(f) - f - i theta} (i d theta sin eta cos eta + d eta)
///   psi    = (e^{f + i theta} cos eta, e^{conj(f)} sin eta)
/// ```
pub fn lift_from_angles(a: &LiftAngles) -> Result<Lift> {
    let (theta, eta) = (&a.theta, &a.eta);
    let cos = eta.map(|e| e.cos());
    let sin = eta.map(|e| e.sin());
    let rhs = (-I) * (theta.dbar() * &cos * &cos);
    let f = rhs.solve_dbar(DEFAULT_SOLVABILITY_TOL)?;
    let fc = f.conj();
    let itheta = I * theta;
    let bracket = I * (theta.d() * &sin * &cos) + eta.d();
    let p = -((&fc - &f - &itheta).exp() * bracket);
    let psi = SpinorField {
        c1: (&f + &itheta).exp() * &cos,
        c2: fc.exp() * &sin,
    };
    Ok(Lift {
        gauge: GaugeFunction { f },
        potential: SurfacePotential { p },
        psi,
    })
}

/// Residuals of the two conservation laws
/// `d(phi2 psi2) + dbar(phi1 psi1)` and `dbar(psi1 conj(phi2)) - d(conj(phi1) psi2)`.
pub fn conservation_residual(
    psi: &SpinorField,
    phi: &SpinorField,
) -> Result<(ComplexField, ComplexField)> {
    psi.spec().ensure_same(phi.spec())?;
    let r1 = (&phi.c2 * &psi.c2).d() + (&phi.c1 * &psi.c1).dbar();
    let r2 = (&psi.c1 * &phi.c2.conj()).dbar() - (&phi.c1.conj() * &psi.c2).d();
    Ok((r1, r2))
}

/// Value and both Wirtinger derivatives of a scalar at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d: Complex64,
    pub dbar: Complex64,
}

impl Jet {
    fn scale(self, s: Complex64) -> Self {
        Jet {
            v: self.v * s,
            d: self.d * s,
            dbar: self.dbar * s,
        }
    }

    /// Product rule.
    pub fn times(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dbar: self.dbar * o.v + self.v * o.dbar,
        }
    }

    /// Jet of the complex conjugate.
    pub fn conj(self) -> Jet {
        Jet {
            v: self.v.conj(),
            d: self.dbar.conj(),
            dbar: self.d.conj(),
        }
    }
}

/// Closed-form point values of a catalog solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJets {
    pub p: Complex64,
    pub psi: [Jet; 2],
    pub phi: [Jet; 2],
}

/// Pointwise Dirac residual from jets (no grid calculus).
pub fn jet_dirac_residual(p: Complex64, s: &[Jet; 2], which: DiracKind) -> [Complex64; 2] {
    let (top, bottom) = match which {
        DiracKind::D => (p, p.conj()),
        DiracKind::Dtilde => (p.conj(), p),
    };
    [top * s[0].v + s[1].d, bottom * s[1].v - s[0].dbar]
}

/// Exact solutions of both Dirac equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogParams {
    /// `p = 0`, `psi = phi = (1, 0)`.
    Plane,
    /// Constant real `p = c`; `psi1 = e^{i(kz + conj(k zbar))}`, `psi2 = (i conj(k)/c) psi1`,
    /// and likewise for `phi` with `m`. Requires `|k| = |m| = c`.
    Wave { c: f64, k: Complex64, m: Complex64 },
    /// Wave composed with the constant gauge `gauge`.
    GaugedWave {
        c: f64,
        k: Complex64,
        m: Complex64,
        gauge: Complex64,
    },
    /// Lift with `theta = 0` and `eta = eta0 + amp sin(kappa x)`:
    /// `p = -eta'/2` is real and `psi = phi = (cos eta, sin eta)`.
    Profile { eta0: f64, amp: f64, kappa: f64 },
}

impl CatalogParams {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogParams::Plane => "plane",
            CatalogParams::Wave { .. } => "wave",
            CatalogParams::GaugedWave { .. } => "gauged_wave",
            CatalogParams::Profile { .. } => "profile",
        }
    }

    /// Unit wave on `[0, 2pi)^2` with `k = 1` and `m = -1`.
    pub fn default_wave() -> Self {
        CatalogParams::Wave {
            c: 1.0,
            k: Complex64::new(1.0, 0.0),
            m: Complex64::new(-1.0, 0.0),
        }
    }

    /// Closed-form jets at the point `z`.
    pub fn jets(&self, z: Complex64) -> PointJets {
        let one = Jet {
            v: Complex64::new(1.0, 0.0),
            d: Complex64::new(0.0, 0.0),
            dbar: Complex64::new(0.0, 0.0),
        };
        let zero = one.scale(Complex64::new(0.0, 0.0));
        match *self {
            CatalogParams::Plane => PointJets {
                p: Complex64::new(0.0, 0.0),
                psi: [one, zero],
                phi: [one, zero],
            },
            CatalogParams::Wave { c, k, m } => {
                let wave = |k: Complex64| {
                    let e = (I * (k * z + (k * z).conj())).exp();
                    let j1 = Jet {
                        v: e,
                        d: I * k * e,
                        dbar: I * k.conj() * e,
                    };
                    [j1, j1.scale(I * k.conj() / c)]
                };
                PointJets {
                    p: Complex64::new(c, 0.0),
                    psi: wave(k),
                    phi: wave(m),
                }
            }
            CatalogParams::GaugedWave { c, k, m, gauge } => {
                let base = CatalogParams::Wave { c, k, m }.jets(z);
                let (e, ec) = (gauge.exp(), gauge.conj().exp());
                PointJets {
                    p: base.p * (gauge.conj() - gauge).exp(),
                    psi: [base.psi[0].scale(e), base.psi[1].scale(ec)],
                    phi: [base.phi[0].scale(e.inv()), base.phi[1].scale(ec.inv())],
                }
            }
            CatalogParams::Profile { eta0, amp, kappa } => {
                let x = z.re;
                let eta = eta0 + amp * (kappa * x).sin();
                let half_deta = Complex64::new(0.5 * amp * kappa * (kappa * x).cos(), 0.0);
                let (s, c) = eta.sin_cos();
                let j1 = Jet {
                    v: Complex64::new(c, 0.0),
                    d: -s * half_deta,
                    dbar: -s * half_deta,
                };
                let j2 = Jet {
                    v: Complex64::new(s, 0.0),
                    d: c * half_deta,
                    dbar: c * half_deta,
                };
                PointJets {
                    p: -half_deta,
                    psi: [j1, j2],
                    phi: [j1, j2],
                }
            }
        }
    }

    fn validate(&self, spec: &GridSpec) -> Result<()> {
        let on_lattice = |v: f64, l: f64| {
            let n = v * l / (2.0 * PI);
            (n - n.round()).abs() < 1e-9
        };
        let check_wave = |c: f64, k: Complex64, name: &str| -> Result<()> {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidParameter(format!("c = {c} must be positive")));
            }
            if (k.norm() - c).abs() > 1e-12 * c.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "|{name}| = {} differs from c = {c}",
                    k.norm()
                )));
            }
            // the phase is 2 Re(k z) = 2 (a x - b y) for k = a + ib
            if !on_lattice(2.0 * k.re, spec.lx()) || !on_lattice(2.0 * k.im, spec.ly()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {k} is not on the dual lattice of {spec}"
                )));
            }
            Ok(())
        };
        match *self {
            CatalogParams::Plane => Ok(()),
            CatalogParams::Wave { c, k, m } | CatalogParams::GaugedWave { c, k, m, .. } => {
                check_wave(c, k, "k")?;
                check_wave(c, m, "m")?;
                if let CatalogParams::GaugedWave { gauge, .. } = self {
                    if !(gauge.re.is_finite() && gauge.im.is_finite()) {
                        return Err(Error::InvalidParameter("gauge must be finite".into()));
                    }
                }
                Ok(())
            }
            CatalogParams::Profile { eta0, amp, kappa } => {
                if !(eta0.is_finite() && amp.is_finite()) {
                    return Err(Error::InvalidParameter("profile must be finite".into()));
                }
                if !on_lattice(kappa, spec.lx()) {
                    return Err(Error::InvalidParameter(format!(
                        "kappa = {kappa} is not periodic on {spec}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A catalog entry sampled on a grid.
#[derive(Debug, Clone)]
pub struct CatalogSolution {
    pub params: CatalogParams,
    pub potential: SurfacePotential,
    pub psi: SpinorField,
    pub phi: SpinorField,
}

impl CatalogSolution {
    pub fn jets(&self, z: Complex64) -> PointJets {
        self.params.jets(z)
    }
}

pub fn catalog_solution(spec: GridSpec, params: CatalogParams) -> Result<CatalogSolution> {
    params.validate(&spec)?;
    let sample = |pick: &dyn Fn(&PointJets) -> Complex64| {
        ComplexField::from_z_fn(spec, |z| pick(&params.jets(z)))
    };
    let potential = SurfacePotential::new(sample(&|j| j.p))?;
    let psi = SpinorField {
        c1: sample(&|j| j.psi[0].v),
        c2: sample(&|j| j.psi[1].v),
    };
    let phi = SpinorField {
        c1: sample(&|j| j.phi[0].v),
        c2: sample(&|j| j.phi[1].v),
    };
    Ok(CatalogSolution {
        params,
        potential,
        psi,
        phi,
    })
}

/// Checks the gauge proposition for the holomorphic gauge `f = alpha z + beta`
/// at the given points using closed-form jets only.
///
/// Returns the largest residual of both transformed Dirac equations with
/// transformed potential `p e^{conj(f) - f}`.
pub fn holomorphic_gauge_residual(
    params: &CatalogParams,
    alpha: Complex64,
    beta: Complex64,
    points: &[Complex64],
) -> f64 {
    let mut worst: f64 = 0.0;
    for &z in points {
        let j = params.jets(z);
        let f = Jet {
            v: alpha * z + beta,
            d: alpha,
            dbar: Complex64::new(0.0, 0.0),
        };
        let exp = |g: Jet| {
            let e = g.v.exp();
            Jet {
                v: e,
                d: g.d * e,
                dbar: g.dbar * e,
            }
        };
        let neg = |g: Jet| g.scale(Complex64::new(-1.0, 0.0));
        let (ef, efc) = (exp(f), exp(f.conj()));
        let (emf, emfc) = (exp(neg(f)), exp(neg(f.conj())));
        let big_p = j.p * (f.v.conj() - f.v).exp();
        let kappa = [ef.times(j.psi[0]), efc.times(j.psi[1])];
        let tau = [emf.times(j.phi[0]), emfc.times(j.phi[1])];
        let scale = 1.0
            + ef.v
                .norm()
                .max(efc.v.norm())
                .max(emf.v.norm())
                .max(emfc.v.norm());
        for r in jet_dirac_residual(big_p, &kappa, DiracKind::D)
            .into_iter()
            .chain(jet_dirac_residual(big_p, &tau, DiracKind::Dtilde))
        {
            worst = worst.max(r.norm() / scale);
        }
    }
    worst
}
