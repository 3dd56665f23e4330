//! Surfaces in four-dimensional space from spinor pairs.
//!
//! The forms `eta_k = f_k dz + conj(f_k) dzbar` built from `(psi, phi)` are
//! closed whenever both Dirac equations hold; integrating them gives a
//! conformal immersion `X = (X^1, .., X^4)` with `X_z = f`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{spectral_antiderivative, trapezoid_antiderivative, ComplexField, GridSpec};
use crate::spinor::{SpinorField, SurfacePotential};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coefficients `f_1..f_4` of the four one-forms.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormSet {
    pub f: [ComplexField; 4],
}

impl OneFormSet {
    pub fn spec(&self) -> &GridSpec {
        self.f[0].spec()
    }

    pub fn max_abs(&self) -> f64 {
        self.f.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.f
            .iter()
            .zip(&other.f)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }

    /// Real `dx` and `dy` coefficients `2 Re f` and `-2 Im f` of form `k`.
    fn real_components(&self, k: usize) -> (ComplexField, ComplexField) {
        let f = &self.f[k];
        (
            f.map(|c| Complex64::new(2.0 * c.re, 0.0)),
            f.map(|c| Complex64::new(-2.0 * c.im, 0.0)),
        )
    }
}

pub fn one_form_coefficients(psi: &SpinorField, phi: &SpinorField) -> Result<OneFormSet> {
    psi.spec().ensure_same(phi.spec())?;
    let a = &phi.c2.conj() * &psi.c2.conj();
    let b = &phi.c1 * &psi.c1;
    let c = &phi.c2.conj() * &psi.c1;
    let d = &phi.c1 * &psi.c2.conj();
    Ok(OneFormSet {
        f: [
            (&a + &b).scale(0.5 * I),
            (&a - &b) * 0.5,
            (&c + &d) * 0.5,
            (&c - &d).scale(0.5 * I),
        ],
    })
}

/// `dbar f_k - d conj(f_k)` for each form.
pub fn closedness_residual(forms: &OneFormSet) -> [ComplexField; 4] {
    forms.f.clone().map(|f| f.dbar() - f.conj().d())
}

pub fn max_closedness(forms: &OneFormSet) -> f64 {
    closedness_residual(forms)
        .iter()
        .map(|r| r.max_abs())
        .fold(0.0, f64::max)
}

/// Quadrature along grid lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineRule {
    /// Exact for band-limited periodic integrands.
    #[default]
    Spectral,
    /// Cumulative trapezoid, second order.
    Trapezoid,
}

/// Order of the two legs of the grid-aligned path from the origin sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathOrder {
    /// Along `x` at `y = 0`, then up each column.
    RowFirst,
    /// Up the column `x = 0`, then along each row.
    ColumnFirst,
}

fn antiderivative(rule: LineRule, g: &[Complex64], period: f64) -> Vec<Complex64> {
    match rule {
        LineRule::Spectral => spectral_antiderivative(g, period),
        LineRule::Trapezoid => trapezoid_antiderivative(g, period),
    }
}

/// Integrates `gx dx + gy dy` from sample `(0, 0)` along grid-aligned paths.
pub fn integrate_form(
    gx: &ComplexField,
    gy: &ComplexField,
    order: PathOrder,
    rule: LineRule,
) -> Result<ComplexField> {
    gx.spec().ensure_same(gy.spec())?;
    let spec = *gx.spec();
    let (nx, ny) = (spec.nx(), spec.ny());
    let mut out = ComplexField::zeros(spec);
    let row = |f: &ComplexField, j: usize| (0..nx).map(|i| f.get(i, j)).collect::<Vec<_>>();
    let col = |f: &ComplexField, i: usize| (0..ny).map(|j| f.get(i, j)).collect::<Vec<_>>();
    match order {
        PathOrder::RowFirst => {
            let bottom = antiderivative(rule, &row(gx, 0), spec.lx());
            for (i, b) in bottom.into_iter().enumerate() {
                let up = antiderivative(rule, &col(gy, i), spec.ly());
                for (j, u) in up.into_iter().enumerate() {
                    out.set(i, j, b + u);
                }
            }
        }
        PathOrder::ColumnFirst => {
            let left = antiderivative(rule, &col(gy, 0), spec.ly());
            for (j, l) in left.into_iter().enumerate() {
                let across = antiderivative(rule, &row(gx, j), spec.lx());
                for (i, a) in across.into_iter().enumerate() {
                    out.set(i, j, l + a);
                }
            }
        }
    }
    Ok(out)
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub rule: LineRule,
    /// Largest accepted closedness residual, relative to `1 + max |f|`.
    pub closedness_tol: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rule: LineRule::Spectral,
            closedness_tol: 1e-6,
        }
    }
}

/// Coordinates `X^1..X^4` of an immersed surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceR4 {
    pub x: [ComplexField; 4],
    pub base: [f64; 4],
    /// Increments of each coordinate around the `x` and `y` cycles.
    pub periods: [[f64; 2]; 4],
}

fn periods_of(forms: &OneFormSet) -> [[f64; 2]; 4] {
    let spec = *forms.spec();
    std::array::from_fn(|k| {
        let f = &forms.f[k];
        let px: f64 = (0..spec.nx()).map(|i| 2.0 * f.get(i, 0).re).sum::<f64>() * spec.dx();
        let py: f64 = (0..spec.ny()).map(|j| -2.0 * f.get(0, j).im).sum::<f64>() * spec.dy();
        [px, py]
    })
}

fn integrate_unchecked(
    forms: &OneFormSet,
    base: [f64; 4],
    order: PathOrder,
    rule: LineRule,
) -> [ComplexField; 4] {
    std::array::from_fn(|k| {
        let (gx, gy) = forms.real_components(k);
        let x = integrate_form(&gx, &gy, order, rule).expect("forms share one grid");
        x + base[k]
    })
}

/// Integrates the forms along the row-first path, starting from `base` at
/// sample `(0, 0)`.
pub fn integrate_surface(
    forms: &OneFormSet,
    base: [f64; 4],
    opts: IntegrationOptions,
) -> Result<SurfaceR4> {
    let defect = max_closedness(forms);
    if defect > opts.closedness_tol * (1.0 + forms.max_abs()) {
        return Err(Error::NotClosed(defect));
    }
    let x = integrate_unchecked(forms, base, PathOrder::RowFirst, opts.rule);
    for c in &x {
        if c.max_abs_imag() > 1e-10 * (1.0 + c.max_abs()) {
            return Err(Error::InvalidField("surface coordinate is not real".into()));
        }
    }
    Ok(SurfaceR4 {
        x,
        base,
        periods: periods_of(forms),
    })
}

/// `max |X_rowfirst - X_columnfirst|` over samples and coordinates.
pub fn path_independence(forms: &OneFormSet, rule: LineRule) -> f64 {
    let a = integrate_unchecked(forms, [0.0; 4], PathOrder::RowFirst, rule);
    let b = integrate_unchecked(forms, [0.0; 4], PathOrder::ColumnFirst, rule);
    a.iter()
        .zip(&b)
        .map(|(a, b)| a.max_diff(b))
        .fold(0.0, f64::max)
}

impl SurfaceR4 {
    pub fn spec(&self) -> &GridSpec {
        self.x[0].spec()
    }

    /// Linear part `P_x x / lx + P_y y / ly` of coordinate `k`.
    fn linear_part(&self, k: usize) -> ComplexField {
        let spec = *self.spec();
        let [px, py] = self.periods[k];
        ComplexField::from_real_fn(spec, |x, y| px * x / spec.lx() + py * y / spec.ly())
    }

    /// Periodic remainder after removing the linear part.
    fn periodic_part(&self, k: usize) -> ComplexField {
        &self.x[k] - &self.linear_part(k)
    }

    /// `X_z` for each coordinate.
    pub fn x_z(&self) -> [ComplexField; 4] {
        let spec = *self.spec();
        std::array::from_fn(|k| {
            let [px, py] = self.periods[k];
            let slope = Complex64::new(0.5 * px / spec.lx(), -0.5 * py / spec.ly());
            self.periodic_part(k).d() + slope
        })
    }

    /// `X_{z zbar}` for each coordinate (a quarter of the Laplacian).
    pub fn x_zzbar(&self) -> [ComplexField; 4] {
        std::array::from_fn(|k| self.periodic_part(k).d().dbar().re())
    }

    /// One row per sample: `x,y,X1,X2,X3,X4`.
    pub fn to_csv(&self) -> String {
        let spec = *self.spec();
        let mut out = String::from("x,y,X1,X2,X3,X4\n");
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                let (x, y) = spec.point(i, j);
                out.push_str(&format!("{x:e},{y:e}"));
                for c in &self.x {
                    out.push_str(&format!(",{:e}", c.get(i, j).re));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Wavefront OBJ of the projection onto coordinates `proj` (0-based),
    /// with every grid quad split into two triangles.
    pub fn to_obj(&self, proj: [usize; 3]) -> Result<String> {
        if proj.iter().any(|&k| k > 3)
            || proj[0] == proj[1]
            || proj[1] == proj[2]
            || proj[0] == proj[2]
        {
            return Err(Error::InvalidParameter(format!(
                "projection {proj:?} must pick three distinct coordinates"
            )));
        }
        let spec = *self.spec();
        let (nx, ny) = (spec.nx(), spec.ny());
        let mut out = format!(
            "# surface projection onto X{} X{} X{}\n",
            proj[0] + 1,
            proj[1] + 1,
            proj[2] + 1
        );
        for j in 0..ny {
            for i in 0..nx {
                let v = proj.map(|k| self.x[k].get(i, j).re);
                out.push_str(&format!("v {:e} {:e} {:e}\n", v[0], v[1], v[2]));
            }
        }
        let id = |i: usize, j: usize| j * nx + i + 1;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                out.push_str(&format!("f {a} {b} {c}\nf {a} {c} {d}\n"));
            }
        }
        Ok(out)
    }
}

/// Metric and curvature data of an immersed surface.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    /// `e^{2 alpha} = (|psi1|^2 + |psi2|^2)(|phi1|^2 + |phi2|^2)`.
    pub conformal_factor: ComplexField,
    /// Components of `H = 2 e^{-2 alpha} X_{z zbar}`.
    pub mean_curvature: [ComplexField; 4],
    /// `sum_k (X^k_z)^2`.
    pub conformality_residual: ComplexField,
    /// `max |2 sum_k |X^k_z|^2 - e^{2 alpha}| / max e^{2 alpha}`.
    pub metric_residual: f64,
    /// `max | |p| - (e^alpha / 2) |H| |`.
    pub curvature_residual: f64,
}

pub fn surface_geometry(
    psi: &SpinorField,
    phi: &SpinorField,
    surface: &SurfaceR4,
    p: &SurfacePotential,
) -> Result<SurfaceGeometry> {
    psi.spec().ensure_same(phi.spec())?;
    psi.spec().ensure_same(surface.spec())?;
    psi.spec().ensure_same(p.spec())?;
    let u1 = psi.c1.abs_sqr() + psi.c2.abs_sqr();
    let u2 = phi.c1.abs_sqr() + phi.c2.abs_sqr();
    let cf = &u1 * &u2;
    let scale = cf.max_abs();
    if scale == 0.0 || cf.min_abs() <= 1e-14 * scale {
        let spec = *cf.spec();
        let k = (0..spec.len())
            .min_by(|&a, &b| cf.data()[a].norm().total_cmp(&cf.data()[b].norm()))
            .unwrap_or(0);
        return Err(Error::Degenerate(format!(
            "conformal factor vanishes at (i={}, j={})",
            k % spec.nx(),
            k / spec.nx()
        )));
    }
    let xz = surface.x_z();
    let xzz = surface.x_zzbar();
    let mean_curvature = xzz.map(|x| (x * 2.0).zip_map(&cf, |a, b| a / b));
    let conformality_residual = xz
        .iter()
        .fold(ComplexField::zeros(*cf.spec()), |acc, x| acc + x * x);
    let norm2 = xz
        .iter()
        .fold(ComplexField::zeros(*cf.spec()), |acc, x| acc + x.abs_sqr());
    let metric_residual = (norm2 * 2.0).max_diff(&cf) / scale;
    let mut curvature_residual: f64 = 0.0;
    for k in 0..cf.data().len() {
        let h: f64 = mean_curvature
            .iter()
            .map(|m| m.data()[k].re.powi(2))
            .sum::<f64>()
            .sqrt();
        let ealpha = cf.data()[k].re.sqrt();
        let r = p.p.data()[k].norm() - 0.5 * ealpha * h;
        curvature_residual = curvature_residual.max(r.abs());
    }
    Ok(SurfaceGeometry {
        conformal_factor: cf,
        mean_curvature,
        conformality_residual,
        metric_residual,
        curvature_residual,
    })
}

/// Outcome of comparing the four-dimensional construction with `phi = psi`
/// against the three-dimensional integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R3Report {
    /// `max |X^4 - X^4(0)|`.
    pub x4_variation: f64,
    /// Largest coordinate difference between the two constructions.
    pub max_discrepancy: f64,
    /// Residual of the three-dimensional Dirac system.
    pub dirac_residual: f64,
}

/// Builds the surface with `phi = psi` for real `p` and rebuilds `X^1..X^3`
/// from the three-dimensional formulas with `(psi3, phi3) = (psi2, -psi1)`:
///
/// ```text
///   X1 + i X2 = i int (conj(psi3)^2 dz - conj(phi3)^2 dzbar)
///   X3        = -int (conj(psi3) phi3 dz + psi3 conj(phi3) dzbar)
/// ```
pub fn r3_reduction_check(
    p: &SurfacePotential,
    psi: &SpinorField,
    opts: IntegrationOptions,
) -> Result<R3Report> {
    p.spec().ensure_same(psi.spec())?;
    if p.p.max_abs_imag() > 1e-10 * (1.0 + p.p.max_abs()) {
        return Err(Error::InvalidReduction("potential is not real".into()));
    }
    let forms = one_form_coefficients(psi, psi)?;
    let surface = integrate_surface(&forms, [0.0; 4], opts)?;
    let x40 = surface.x[3].get(0, 0);
    let x4_variation = surface.x[3].map(|c| c - x40).max_abs();

    let psi3 = psi.c2.clone();
    let phi3 = -&psi.c1;
    let line = |g: ComplexField, h: ComplexField| {
        // g dz + h dzbar = (g + h) dx + i (g - h) dy
        let gx = &g + &h;
        let gy = (&g - &h).scale(I);
        integrate_form(&gx, &gy, PathOrder::RowFirst, opts.rule)
    };
    let x12 = line(
        (&psi3.conj() * &psi3.conj()).scale(I),
        (&phi3.conj() * &phi3.conj()).scale(-I),
    )?;
    let x3 = -line(&psi3.conj() * &phi3, &psi3 * &phi3.conj())?;
    let rebuilt = [x12.re(), x12.im(), x3];
    let max_discrepancy = rebuilt
        .iter()
        .zip(&surface.x)
        .map(|(a, b)| a.max_diff(b))
        .fold(0.0, f64::max);

    let r1 = psi3.d() - &p.p * &phi3;
    let r2 = phi3.dbar() + &p.p * &psi3;
    Ok(R3Report {
        x4_variation,
        max_discrepancy,
        dirac_residual: r1.max_abs().max(r2.max_abs()),
    })
}
