//! Quadric model of the Grassmannian of oriented two-planes in four-space,
//! its product structure and the Gauss map of a computed surface.
//!
//! ```text
//!   sigma(w1, w2) = (1 + w1 w2, i(1 - w1 w2), w1 - w2, -i(w1 + w2))
//!   w1 = (z3 + i z4)/(z1 - i z2),   w2 = (-z3 + i z4)/(z1 - i z2)
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::spinor::SpinorField;
use crate::weierstrass::SurfaceR4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of `z1 - i z2` below which the affine chart is singular.
pub const CHART_TOL: f64 = 1e-12;

/// Homogeneous point `(z1, .., z4)` of the quadric `sum z_k^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadricPoint {
    pub z: [Complex64; 4],
}

fn norm(z: &[Complex64; 4]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `sum_k z_k^2`.
pub fn quadric_residual(z: &[Complex64; 4]) -> Complex64 {
    z.iter().map(|c| c * c).sum()
}

impl QuadricPoint {
    /// Accepts `z` if it is nonzero and `|sum z^2| <= tol |z|^2`.
    pub fn new(z: [Complex64; 4], tol: f64) -> Result<Self> {
        let n = norm(&z);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(
                "quadric point must be finite and nonzero".into(),
            ));
        }
        let r = quadric_residual(&z).norm();
        if r > tol * n * n {
            return Err(Error::InvalidParameter(format!(
                "point is off the quadric: |sum z^2| = {r:e}"
            )));
        }
        Ok(Self { z })
    }

    /// Real vectors `A`, `B` with `z = A + iB`.
    pub fn real_pair(&self) -> ([f64; 4], [f64; 4]) {
        (self.z.map(|c| c.re), self.z.map(|c| c.im))
    }
}

/// Affine coordinates on the product of two projective lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub w1: Complex64,
    pub w2: Complex64,
}

pub fn sigma(w: ProductPoint) -> QuadricPoint {
    let (a, b) = (w.w1, w.w2);
    let one = Complex64::new(1.0, 0.0);
    QuadricPoint {
        z: [one + a * b, I * (one - a * b), a - b, -I * (a + b)],
    }
}

pub fn sigma_inverse(zp: &QuadricPoint) -> Result<ProductPoint> {
    let [z1, z2, z3, z4] = zp.z;
    let den = z1 - I * z2;
    if den.norm() <= CHART_TOL * norm(&zp.z) {
        return Err(Error::Singular(format!("z1 - i z2 vanishes at {:?}", zp.z)));
    }
    Ok(ProductPoint {
        w1: (z3 + I * z4) / den,
        w2: (-z3 + I * z4) / den,
    })
}

/// `(y1, .., y4) -> (i(y1 + y2)/2, (y1 - y2)/2, (y3 + y4)/2, i(y3 - y4)/2)`,
/// under which `sum z^2 = -y1 y2 + y3 y4`.
pub fn coordinate_change_y_to_z(y: [Complex64; 4]) -> [Complex64; 4] {
    [
        0.5 * I * (y[0] + y[1]),
        0.5 * (y[0] - y[1]),
        0.5 * (y[2] + y[3]),
        0.5 * I * (y[2] - y[3]),
    ]
}

/// `2|dw1|^2/(1 + |w1|^2)^2 + 2|dw2|^2/(1 + |w2|^2)^2`.
pub fn q2_metric_eval(w: ProductPoint, dw1: Complex64, dw2: Complex64) -> f64 {
    let term = |w: Complex64, dw: Complex64| 2.0 * dw.norm_sqr() / (1.0 + w.norm_sqr()).powi(2);
    term(w.w1, dw1) + term(w.w2, dw2)
}

/// Fubini-Study chordal distance `|a ^ b| / (|a| |b|)`, the sine of the angle
/// between the complex lines spanned by `a` and `b`.
pub fn projective_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let mut wedge = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            wedge += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    wedge.sqrt() / (norm(a) * norm(b))
}

/// Chordal distance of two points of the projective line in affine charts.
pub fn chordal_distance(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

/// Gauss map of a surface on the grid.
#[derive(Debug, Clone)]
pub struct GaussMap {
    pub w1: ComplexField,
    pub w2: ComplexField,
    /// `max |sum_k (X^k_z)^2| / |X_z|^2`.
    pub quadric_residual_max: f64,
    /// `max` chordal distance between `sigma(w)` and `X_z`.
    pub consistency_max: f64,
}

/// Relative quadric tolerance for tangent data.
pub const TANGENT_QUADRIC_TOL: f64 = 1e-6;

/// Gauss map from tangent data `X_z`.
pub fn gauss_map_from_tangent(xz: &[ComplexField; 4]) -> Result<GaussMap> {
    let spec = *xz[0].spec();
    for f in &xz[1..] {
        spec.ensure_same(f.spec())?;
    }
    let scale = (0..spec.len())
        .map(|k| norm(&std::array::from_fn(|c| xz[c].data()[k])))
        .fold(0.0, f64::max);
    let mut w1 = ComplexField::zeros(spec);
    let mut w2 = ComplexField::zeros(spec);
    let mut quadric_residual_max: f64 = 0.0;
    let mut consistency_max: f64 = 0.0;
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            let z: [Complex64; 4] = std::array::from_fn(|c| xz[c].get(i, j));
            let n = norm(&z);
            if !(n > 1e-12 * scale) {
                return Err(Error::Singular(format!(
                    "X_z vanishes at sample (i={i}, j={j})"
                )));
            }
            let r = quadric_residual(&z).norm() / (n * n);
            if r > TANGENT_QUADRIC_TOL {
                return Err(Error::Singular(format!(
                    "X_z is off the quadric at sample (i={i}, j={j}): {r:e}"
                )));
            }
            quadric_residual_max = quadric_residual_max.max(r);
            let w = sigma_inverse(&QuadricPoint { z })
                .map_err(|_| Error::Singular(format!("singular chart at sample (i={i}, j={j})")))?;
            consistency_max = consistency_max.max(projective_distance(&sigma(w).z, &z));
            w1.set(i, j, w.w1);
            w2.set(i, j, w.w2);
        }
    }
    Ok(GaussMap {
        w1,
        w2,
        quadric_residual_max,
        consistency_max,
    })
}

pub fn gauss_map_of_surface(surface: &SurfaceR4) -> Result<GaussMap> {
    gauss_map_from_tangent(&surface.x_z())
}

/// Candidate spinor expressions for the Gauss map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFamily {
    /// `w1 = psi1 / conj(psi2)`, `w2 = phi1 / conj(phi2)`.
    Direct,
    /// `w1 = -i conj(psi2) / psi1`, `w2 = i conj(phi2) / phi1`.
    Inverse,
}

impl RatioFamily {
    pub const ALL: [RatioFamily; 2] = [RatioFamily::Direct, RatioFamily::Inverse];

    pub fn name(self) -> &'static str {
        match self {
            RatioFamily::Direct => "psi1/conj(psi2), phi1/conj(phi2)",
            RatioFamily::Inverse => "-i conj(psi2)/psi1, i conj(phi2)/phi1",
        }
    }

    pub fn eval(self, psi: &SpinorField, phi: &SpinorField) -> (ComplexField, ComplexField) {
        let div = |a: &ComplexField, b: &ComplexField| a.zip_map(b, |x, y| x / y);
        match self {
            RatioFamily::Direct => (div(&psi.c1, &psi.c2.conj()), div(&phi.c1, &phi.c2.conj())),
            RatioFamily::Inverse => (
                div(&psi.c2.conj().scale(-I), &psi.c1),
                div(&phi.c2.conj().scale(I), &phi.c1),
            ),
        }
    }
}

/// Max chordal mismatch of each candidate family against a computed Gauss map.
/// Samples where a candidate is not finite count as a full mismatch.
pub fn compare_ratio_families(
    gauss: &GaussMap,
    psi: &SpinorField,
    phi: &SpinorField,
) -> Vec<(RatioFamily, f64)> {
    RatioFamily::ALL
        .iter()
        .map(|&fam| {
            let (a, b) = fam.eval(psi, phi);
            let mut worst: f64 = 0.0;
            for k in 0..a.data().len() {
                let (x, y) = (a.data()[k], b.data()[k]);
                let d = if x.is_finite() && y.is_finite() {
                    chordal_distance(x, gauss.w1.data()[k])
                        .max(chordal_distance(y, gauss.w2.data()[k]))
                } else {
                    1.0
                };
                worst = worst.max(d);
            }
            (fam, worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spinor::{catalog_solution, CatalogParams};
    use crate::weierstrass::{integrate_surface, one_form_coefficients, IntegrationOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sigma_examples() {
        let z = sigma(ProductPoint {
            w1: c(0.0, 0.0),
            w2: c(0.0, 0.0),
        })
        .z;
        assert_eq!(z, [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let z = sigma(ProductPoint {
            w1: c(1.0, 0.0),
            w2: c(1.0, 0.0),
        })
        .z;
        assert_eq!(z, [c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0)]);
        assert_eq!(quadric_residual(&z), c(0.0, 0.0));
    }

    #[test]
    fn sigma_inverse_examples() {
        let w = sigma_inverse(&QuadricPoint {
            z: [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
        })
        .unwrap();
        assert_eq!((w.w1, w.w2), (c(0.0, 0.0), c(0.0, 0.0)));
        let bad = QuadricPoint {
            z: [c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)],
        };
        assert!(matches!(sigma_inverse(&bad), Err(Error::Singular(_))));
        assert!(
            QuadricPoint::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 1e-12).is_err()
        );
        assert!(QuadricPoint::new([c(0.0, 0.0); 4], 1e-12).is_err());
    }

    #[test]
    fn coordinate_change_examples() {
        let z = coordinate_change_y_to_z([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(z, [c(0.0, 0.5), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(quadric_residual(&z).norm() < 1e-16);
        let z = coordinate_change_y_to_z([c(1.0, 0.0); 4]);
        assert_eq!(z, [c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(quadric_residual(&z).norm() < 1e-16);
    }

    #[test]
    fn metric_examples() {
        let zero = ProductPoint {
            w1: c(0.0, 0.0),
            w2: c(0.0, 0.0),
        };
        assert_eq!(q2_metric_eval(zero, c(1.0, 0.0), c(0.0, 0.0)), 2.0);
        assert_eq!(q2_metric_eval(zero, c(0.0, 0.0), c(1.0, 0.0)), 2.0);
        let w = ProductPoint {
            w1: c(1.0, 0.0),
            w2: c(0.0, 0.0),
        };
        assert_eq!(q2_metric_eval(w, c(1.0, 0.0), c(0.0, 0.0)), 0.5);
    }

    fn catalog_surface(params: CatalogParams) -> (SurfaceR4, SpinorField, SpinorField) {
        let sol = catalog_solution(GridSpec::square(32).unwrap(), params).unwrap();
        let f = one_form_coefficients(&sol.psi, &sol.phi).unwrap();
        let s = integrate_surface(&f, [0.0; 4], IntegrationOptions::default()).unwrap();
        (s, sol.psi, sol.phi)
    }

    #[test]
    fn plane_gauss_map_is_constant() {
        let (s, _, _) = catalog_surface(CatalogParams::Plane);
        let g = gauss_map_of_surface(&s).unwrap();
        let w1 = g.w1.get(0, 0);
        let w2 = g.w2.get(0, 0);
        assert!(g.w1.max_diff(&ComplexField::constant(*g.w1.spec(), w1)) < 1e-12);
        assert!(g.w2.max_diff(&ComplexField::constant(*g.w2.spec(), w2)) < 1e-12);
        assert!(w1.norm() < 1e-12 && w2.norm() < 1e-12);
    }

    #[test]
    fn wave_gauss_map_and_spinor_ratios() {
        let (s, psi, phi) = catalog_surface(CatalogParams::default_wave());
        let g = gauss_map_of_surface(&s).unwrap();
        assert!(g.quadric_residual_max < 1e-8);
        assert!(g.consistency_max < 1e-8);
        let cmp = compare_ratio_families(&g, &psi, &phi);
        let inverse = cmp
            .iter()
            .find(|(f, _)| *f == RatioFamily::Inverse)
            .unwrap()
            .1;
        let direct = cmp
            .iter()
            .find(|(f, _)| *f == RatioFamily::Direct)
            .unwrap()
            .1;
        assert!(inverse < 1e-8, "{cmp:?}");
        assert!(direct > 1e-2, "{cmp:?}");
    }

    #[test]
    fn vanishing_tangent_names_the_sample() {
        let (s, _, _) = catalog_surface(CatalogParams::default_wave());
        let mut xz = s.x_z();
        for f in xz.iter_mut() {
            f.set(5, 7, c(0.0, 0.0));
        }
        match gauss_map_from_tangent(&xz) {
            Err(Error::Singular(msg)) => assert!(msg.contains("i=5, j=7"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projective_distance_is_scale_free() {
        let z = sigma(ProductPoint {
            w1: c(0.3, -1.0),
            w2: c(2.0, 0.5),
        })
        .z;
        let scaled = z.map(|x| x * c(-0.7, 2.1));
        assert!(projective_distance(&z, &scaled) < 1e-15);
        let other = sigma(ProductPoint {
            w1: c(0.0, 0.0),
            w2: c(0.0, 0.0),
        })
        .z;
        assert!(projective_distance(&z, &other) > 0.1);
    }
}
