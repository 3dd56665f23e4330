//! Periodic rectangular grids over the complex plane with spectral complex
//! calculus.
//!
//! A [`GridSpec`] describes the flat torus `[0, lx) x [0, ly)`; sample `(i, j)`
//! sits at `z = i*lx/nx + i * j*ly/ny`. A [`ComplexField`] stores one complex
//! sample per grid point, row-major with `j` (the `y` index) as the row, so
//! sample `(i, j)` lives at `data[j * nx + i]`.
//!
//! The Wirtinger derivatives are evaluated in Fourier space:
//!
//! ```text
//!   d    = 1/2 (d/dx - i d/dy)   symbol 1/2 (i kx + ky)
//!   dbar = 1/2 (d/dx + i d/dy)   symbol 1/2 (i kx - ky)
//! ```
//!
//! Both symbols vanish only on the zero mode, so `d` and `dbar` are invertible
//! on zero-mean fields. Nyquist wavenumbers are treated as zero in derivative
//! symbols.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance on the zero mode of a constraint right side.
pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(len)
        } else {
            p.plan_fft_inverse(len)
        }
    })
}

/// Shape and extent of a periodic computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square `n x n` grid on `[0, 2pi)^2`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Physical coordinates `(x, y)` of sample `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx(), j as f64 * self.dy())
    }

    /// Sample position as a complex number.
    #[inline]
    pub fn z(&self, i: usize, j: usize) -> Complex64 {
        let (x, y) = self.point(i, j);
        Complex64::new(x, y)
    }

    /// Signed mode index for FFT bin `i` of a length-`n` transform.
    #[inline]
    pub(crate) fn mode(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavenumber of x-bin `i`, with the Nyquist bin mapped to zero.
    #[inline]
    pub fn kx(&self, i: usize) -> f64 {
        if i == self.nx / 2 {
            0.0
        } else {
            2.0 * PI / self.lx * Self::mode(i, self.nx) as f64
        }
    }

    #[inline]
    pub fn ky(&self, j: usize) -> f64 {
        if j == self.ny / 2 {
            0.0
        } else {
            2.0 * PI / self.ly * Self::mode(j, self.ny) as f64
        }
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} on [0,{})x[0,{})",
            self.nx, self.ny, self.lx, self.ly
        )
    }
}

/// Quadrature convention for area integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Plain `dx dy`.
    DxDy,
    /// `dz ^ dzbar = -2i dx dy`.
    DzWedgeDzbar,
}

impl Measure {
    pub fn factor(self) -> Complex64 {
        match self {
            Measure::DxDy => Complex64::new(1.0, 0.0),
            Measure::DzWedgeDzbar => Complex64::new(0.0, -2.0),
        }
    }
}

/// Complex samples on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    spec: GridSpec,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, Complex64::new(0.0, 0.0))
    }

    pub fn constant(spec: GridSpec, value: Complex64) -> Self {
        Self {
            spec,
            data: vec![value; spec.len()],
        }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (x, y) = spec.point(i, j);
                data.push(f(x, y));
            }
        }
        Self { spec, data }
    }

    /// Real field from `f(x, y)`.
    pub fn from_real_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(spec, |x, y| Complex64::new(f(x, y), 0.0))
    }

    /// Samples `f(z)` at every grid point.
    pub fn from_z_fn(spec: GridSpec, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_fn(spec, |x, y| f(Complex64::new(x, y)))
    }

    pub fn from_vec(spec: GridSpec, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                spec.len(),
                data.len()
            )));
        }
        let field = Self { spec, data };
        field.ensure_finite()?;
        Ok(field)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.spec.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        let k = self.spec.index(i, j);
        self.data[k] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            None => Ok(()),
            Some(k) => Err(Error::InvalidField(format!(
                "non-finite sample at (i={}, j={})",
                k % self.spec.nx,
                k / self.spec.nx
            ))),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            spec: self.spec,
            data: self.data.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Pointwise combination. Panics if the grids differ.
    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        Self {
            spec: self.spec,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn re(&self) -> Self {
        self.map(|c| Complex64::new(c.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|c| Complex64::new(c.im, 0.0))
    }

    pub fn abs_sqr(&self) -> Self {
        self.map(|c| Complex64::new(c.norm_sqr(), 0.0))
    }

    pub fn exp(&self) -> Self {
        self.map(|c| c.exp())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|c| c * s)
    }

    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// `max |self - other|`. Panics if the grids differ.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Seeded random trigonometric polynomial
    /// `sum_{|a|,|b| <= kmax} amp e^{-(a^2 + b^2)/(2 sigma^2)} c_ab e^{i(a x 2pi/lx + b y 2pi/ly)}`
    /// with independent standard complex normal `c_ab`.
    pub fn random_band_limited<R: Rng + ?Sized>(
        spec: GridSpec,
        rng: &mut R,
        kmax: i64,
        sigma: f64,
        amp: f64,
    ) -> Self {
        let mut modes = Vec::new();
        for a in -kmax..=kmax {
            for b in -kmax..=kmax {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let env = amp * (-((a * a + b * b) as f64) / (2.0 * sigma * sigma)).exp();
                modes.push((a as f64, b as f64, Complex64::new(re, im) * env));
            }
        }
        let (wx, wy) = (2.0 * PI / spec.lx, 2.0 * PI / spec.ly);
        Self::from_fn(spec, |x, y| {
            modes
                .iter()
                .map(|&(a, b, c)| c * Complex64::from_polar(1.0, a * wx * x + b * wy * y))
                .sum()
        })
    }

    /// Trapezoid rule on the torus; exact for band-limited periodic integrands.
    pub fn integrate(&self, measure: Measure) -> Complex64 {
        self.mean() * self.spec.area() * measure.factor()
    }

    /// Forward 2D FFT (unnormalized).
    pub fn to_spectrum(&self) -> Spectrum {
        let mut data = self.data.clone();
        fft2(&self.spec, &mut data, true);
        Spectrum {
            spec: self.spec,
            data,
        }
    }

    fn apply_symbol(&self, symbol: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut s = self.to_spectrum();
        s.multiply(|i, j| symbol(self.spec.kx(i), self.spec.ky(j)));
        s.into_field()
    }

    /// Holomorphic derivative `d/dz`.
    pub fn d(&self) -> Self {
        self.apply_symbol(|kx, ky| Complex64::new(0.5 * ky, 0.5 * kx))
    }

    /// Antiholomorphic derivative `d/dzbar`.
    pub fn dbar(&self) -> Self {
        self.apply_symbol(|kx, ky| Complex64::new(-0.5 * ky, 0.5 * kx))
    }

    pub fn d_x(&self) -> Self {
        self.apply_symbol(|kx, _| Complex64::new(0.0, kx))
    }

    pub fn d_y(&self) -> Self {
        self.apply_symbol(|_, ky| Complex64::new(0.0, ky))
    }

    /// Flat Laplacian `d_xx + d_yy`.
    pub fn laplacian(&self) -> Self {
        self.apply_symbol(|kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0))
    }

    /// Solves `dbar v = self` for the zero-mean `v`.
    ///
    /// The zero mode of the right side must vanish to within
    /// `rel_tol * max|self|`; otherwise the constraint has no periodic solution.
    pub fn solve_dbar(&self, rel_tol: f64) -> Result<Self> {
        self.solve_with(rel_tol, |kx, ky| Complex64::new(-0.5 * ky, 0.5 * kx))
    }

    /// Solves `d w = self` for the zero-mean `w`.
    pub fn solve_d(&self, rel_tol: f64) -> Result<Self> {
        self.solve_with(rel_tol, |kx, ky| Complex64::new(0.5 * ky, 0.5 * kx))
    }

    fn solve_with(&self, rel_tol: f64, symbol: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mean = self.mean();
        let scale = self.max_abs();
        if mean.norm() > rel_tol * scale {
            return Err(Error::UnsolvableConstraint {
                mean: mean.norm(),
                tolerance: rel_tol * scale,
            });
        }
        let mut s = self.to_spectrum();
        s.multiply(|i, j| {
            let sym = symbol(self.spec.kx(i), self.spec.ky(j));
            if sym.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                sym.inv()
            }
        });
        Ok(s.into_field())
    }

    /// Two-thirds rule: zeroes every mode with `|m_x| > nx/3` or `|m_y| > ny/3`.
    pub fn dealias(&self) -> Self {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let (cx, cy) = ((nx / 3) as i64, (ny / 3) as i64);
        let mut s = self.to_spectrum();
        s.multiply(|i, j| {
            if GridSpec::mode(i, nx).abs() > cx || GridSpec::mode(j, ny).abs() > cy {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        s.into_field()
    }

    /// Fraction of spectral norm carried by modes outside the two-thirds band.
    ///
    /// Smooth periodic data give values near machine precision; fields with a
    /// jump across the periodic boundary give values of order 0.1.
    pub fn spectral_tail(&self) -> f64 {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let (cx, cy) = ((nx / 3) as i64, (ny / 3) as i64);
        let s = self.to_spectrum();
        let (mut tail, mut total) = (0.0, 0.0);
        for j in 0..ny {
            for i in 0..nx {
                let e = s.data[j * nx + i].norm_sqr();
                total += e;
                if GridSpec::mode(i, nx).abs() > cx || GridSpec::mode(j, ny).abs() > cy {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (tail / total).sqrt()
        }
    }

    /// CSV with header `i,j,re,im`, one sample per line in storage order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,re,im\n");
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let c = self.get(i, j);
                out.push_str(&format!("{i},{j},{:e},{:e}\n", c.re, c.im));
            }
        }
        out
    }

    /// Parses the layout written by [`ComplexField::to_csv`].
    pub fn from_csv(spec: GridSpec, text: &str) -> Result<Self> {
        let mut field = Self::zeros(spec);
        let mut seen = vec![false; spec.len()];
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: {line:?}", lineno + 1));
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != 4 {
                return Err(bad());
            }
            let i: usize = cells[0].parse().map_err(|_| bad())?;
            let j: usize = cells[1].parse().map_err(|_| bad())?;
            let re: f64 = cells[2].parse().map_err(|_| bad())?;
            let im: f64 = cells[3].parse().map_err(|_| bad())?;
            if i >= spec.nx || j >= spec.ny {
                return Err(bad());
            }
            field.set(i, j, Complex64::new(re, im));
            seen[spec.index(i, j)] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!(
                "missing sample (i={}, j={})",
                k % spec.nx,
                k / spec.nx
            )));
        }
        field.ensure_finite()?;
        Ok(field)
    }
}

/// Fourier coefficients of a [`ComplexField`] (unnormalized forward FFT).
#[derive(Debug, Clone)]
pub struct Spectrum {
    spec: GridSpec,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Coefficient of FFT bin `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.spec.index(i, j)]
    }

    fn multiply(&mut self, f: impl Fn(usize, usize) -> Complex64) {
        let nx = self.spec.nx;
        for j in 0..self.spec.ny {
            for i in 0..nx {
                self.data[j * nx + i] *= f(i, j);
            }
        }
    }

    pub fn into_field(self) -> ComplexField {
        let Spectrum { spec, mut data } = self;
        fft2(&spec, &mut data, false);
        let norm = 1.0 / spec.len() as f64;
        for c in data.iter_mut() {
            *c *= norm;
        }
        ComplexField { spec, data }
    }
}

fn fft2(spec: &GridSpec, data: &mut [Complex64], forward: bool) {
    let (nx, ny) = (spec.nx, spec.ny);
    let row = plan(nx, forward);
    // rows are contiguous, so one call transforms all of them
    row.process(data);
    let col = plan(ny, forward);
    let mut buf = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = data[j * nx + i];
        }
        col.process(&mut buf);
        for j in 0..ny {
            data[j * nx + i] = buf[j];
        }
    }
}

/// One-dimensional exact antiderivative of periodic samples.
///
/// Given `g` sampled at `s_k = k*h` over one period of length `period`, returns
/// `G(s_k) = int_0^{s_k} g`, exact for trigonometric polynomials below Nyquist.
pub(crate) fn spectral_antiderivative(g: &[Complex64], period: f64) -> Vec<Complex64> {
    let n = g.len();
    let mut c = g.to_vec();
    plan(n, true).process(&mut c);
    let norm = 1.0 / n as f64;
    for v in c.iter_mut() {
        *v *= norm;
    }
    let mean = c[0];
    let h = period / n as f64;
    (0..n)
        .map(|k| {
            let s = k as f64 * h;
            let mut acc = mean * s;
            for (b, coef) in c.iter().enumerate().skip(1) {
                if n.is_multiple_of(2) && b == n / 2 {
                    continue;
                }
                let w = 2.0 * PI / period * GridSpec::mode(b, n) as f64;
                acc += coef * ((I * w * s).exp() - 1.0) / (I * w);
            }
            acc
        })
        .collect()
}

/// Cumulative trapezoid antiderivative; second-order accurate.
pub(crate) fn trapezoid_antiderivative(g: &[Complex64], period: f64) -> Vec<Complex64> {
    let h = period / g.len() as f64;
    let mut out = Vec::with_capacity(g.len());
    let mut acc = Complex64::new(0.0, 0.0);
    out.push(acc);
    for w in g.windows(2) {
        acc += (w[0] + w[1]) * (0.5 * h);
        out.push(acc);
    }
    out.truncate(g.len());
    out
}

/// Validated `d/dz`.
pub fn apply_d(f: &ComplexField) -> Result<ComplexField> {
    f.ensure_finite()?;
    Ok(f.d())
}

/// Validated `d/dzbar`.
pub fn apply_dbar(f: &ComplexField) -> Result<ComplexField> {
    f.ensure_finite()?;
    Ok(f.dbar())
}

/// Zero-mean solution of `dbar v = rhs`.
pub fn invert_dbar(rhs: &ComplexField, rel_tol: f64) -> Result<ComplexField> {
    rhs.ensure_finite()?;
    rhs.solve_dbar(rel_tol)
}

/// Zero-mean solution of `d w = rhs`.
pub fn invert_d(rhs: &ComplexField, rel_tol: f64) -> Result<ComplexField> {
    rhs.ensure_finite()?;
    rhs.solve_d(rel_tol)
}

pub fn integrate_area(f: &ComplexField, measure: Measure) -> Result<Complex64> {
    f.ensure_finite()?;
    Ok(f.integrate(measure))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&ComplexField> for &ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: &ComplexField) -> ComplexField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<ComplexField> for ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: ComplexField) -> ComplexField {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ComplexField> for ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: &ComplexField) -> ComplexField {
                (&self).$m(rhs)
            }
        }
        impl $tr<ComplexField> for &ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: ComplexField) -> ComplexField {
                self.$m(&rhs)
            }
        }
        impl $tr<Complex64> for &ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: Complex64) -> ComplexField {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<Complex64> for ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: Complex64) -> ComplexField {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<f64> for &ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: f64) -> ComplexField {
                self.map(|a| a $op rhs)
            }
        }
        impl $tr<f64> for ComplexField {
            type Output = ComplexField;
            fn $m(self, rhs: f64) -> ComplexField {
                self.map(|a| a $op rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<&ComplexField> for Complex64 {
    type Output = ComplexField;
    fn mul(self, rhs: &ComplexField) -> ComplexField {
        rhs.map(|a| self * a)
    }
}

impl Mul<ComplexField> for Complex64 {
    type Output = ComplexField;
    fn mul(self, rhs: ComplexField) -> ComplexField {
        rhs.map(|a| self * a)
    }
}

impl Mul<&ComplexField> for f64 {
    type Output = ComplexField;
    fn mul(self, rhs: &ComplexField) -> ComplexField {
        rhs.map(|a| a * self)
    }
}

impl Mul<ComplexField> for f64 {
    type Output = ComplexField;
    fn mul(self, rhs: ComplexField) -> ComplexField {
        rhs.map(|a| a * self)
    }
}

impl Neg for &ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        self.map(|a| -a)
    }
}

impl Neg for ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        -&self
    }
}

impl AddAssign<&ComplexField> for ComplexField {
    fn add_assign(&mut self, rhs: &ComplexField) {
        assert_eq!(self.spec, rhs.spec, "grid mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexField> for ComplexField {
    fn sub_assign(&mut self, rhs: &ComplexField) {
        assert_eq!(self.spec, rhs.spec, "grid mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> GridSpec {
        GridSpec::square(32).unwrap()
    }

    fn mode(spec: GridSpec, mx: f64, my: f64) -> ComplexField {
        ComplexField::from_fn(spec, |x, y| (I * (mx * x + my * y)).exp())
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(6, 8, 1.0, 1.0).is_err());
        assert!(GridSpec::new(9, 8, 1.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 0.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 1.0, f64::NAN).is_err());
        assert!(GridSpec::new(8, 10, 1.0, 3.0).is_ok());
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let c = ComplexField::constant(grid(), Complex64::new(3.0, -1.0));
        assert!(c.d().max_abs() < 1e-14);
        assert!(c.dbar().max_abs() < 1e-14);
    }

    #[test]
    fn mode_derivatives() {
        let g = grid();
        let ex = mode(g, 1.0, 0.0);
        let ey = mode(g, 0.0, 1.0);
        assert!(ex.d().max_diff(&ex.scale(0.5 * I)) < 1e-13);
        assert!(ey.d().max_diff(&ey.scale(Complex64::new(0.5, 0.0))) < 1e-13);
        assert!(ex.dbar().max_diff(&ex.scale(0.5 * I)) < 1e-13);
        assert!(ey.dbar().max_diff(&ey.scale(Complex64::new(-0.5, 0.0))) < 1e-13);
    }

    #[test]
    fn non_square_domain_wavenumbers() {
        let g = GridSpec::new(16, 24, 3.0, 5.0).unwrap();
        let w = 2.0 * PI / 3.0 * 2.0;
        let f = mode(g, w, 0.0);
        assert!(f.d_x().max_diff(&f.scale(I * w)) < 1e-12);
    }

    #[test]
    fn inverses() {
        let g = grid();
        let rhs = mode(g, 0.0, 1.0).scale(Complex64::new(-0.5, 0.0));
        let v = invert_dbar(&rhs, DEFAULT_SOLVABILITY_TOL).unwrap();
        assert!(v.max_diff(&mode(g, 0.0, 1.0)) < 1e-13);
        let rhs = mode(g, 1.0, 0.0).scale(0.5 * I);
        let w = invert_d(&rhs, DEFAULT_SOLVABILITY_TOL).unwrap();
        assert!(w.max_diff(&mode(g, 1.0, 0.0)) < 1e-13);
        let zero = ComplexField::zeros(g);
        assert_eq!(invert_dbar(&zero, 1e-10).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_rhs_is_unsolvable() {
        let one = ComplexField::constant(grid(), Complex64::new(1.0, 0.0));
        assert!(matches!(
            invert_dbar(&one, DEFAULT_SOLVABILITY_TOL),
            Err(Error::UnsolvableConstraint { .. })
        ));
        assert!(matches!(
            invert_d(&one, DEFAULT_SOLVABILITY_TOL),
            Err(Error::UnsolvableConstraint { .. })
        ));
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut f = ComplexField::zeros(grid());
        f.set(3, 4, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(apply_d(&f), Err(Error::InvalidField(_))));
        assert!(matches!(apply_dbar(&f), Err(Error::InvalidField(_))));
    }

    #[test]
    fn area_integrals() {
        let g = grid();
        let one = ComplexField::constant(g, Complex64::new(1.0, 0.0));
        let area = 4.0 * PI * PI;
        assert_abs_diff_eq!(one.integrate(Measure::DxDy).re, area, epsilon = 1e-12);
        let w = one.integrate(Measure::DzWedgeDzbar);
        assert_abs_diff_eq!(w.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.im, -2.0 * area, epsilon = 1e-12);
        assert!(
            integrate_area(&mode(g, 1.0, 0.0), Measure::DxDy)
                .unwrap()
                .norm()
                < 1e-12
        );
    }

    #[test]
    fn dealias_keeps_low_modes_and_drops_high_ones() {
        let g = grid();
        let low = mode(g, 3.0, -2.0);
        let high = mode(g, 12.0, 0.0);
        assert!(low.dealias().max_diff(&low) < 1e-13);
        assert!(high.dealias().max_abs() < 1e-13);
    }

    #[test]
    fn spectral_tail_flags_sawtooth() {
        let g = grid();
        let smooth = ComplexField::from_real_fn(g, |x, _| x.sin());
        let saw = ComplexField::from_real_fn(g, |x, _| x);
        assert!(smooth.spectral_tail() < 1e-12);
        assert!(saw.spectral_tail() > 1e-2);
    }

    #[test]
    fn antiderivatives() {
        let n = 32;
        let period = 2.0 * PI;
        let g: Vec<Complex64> = (0..n)
            .map(|k| {
                let s = k as f64 * period / n as f64;
                Complex64::new(1.0 + s.cos(), (2.0 * s).sin())
            })
            .collect();
        let exact = |s: f64| Complex64::new(s + s.sin(), (1.0 - (2.0 * s).cos()) / 2.0);
        let spectral = spectral_antiderivative(&g, period);
        let trap = trapezoid_antiderivative(&g, period);
        for k in 0..n {
            let s = k as f64 * period / n as f64;
            assert!((spectral[k] - exact(s)).norm() < 1e-13);
            assert!((trap[k] - exact(s)).norm() < 0.1);
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = GridSpec::new(8, 10, 1.0, 2.0).unwrap();
        let f = ComplexField::from_fn(g, |x, y| Complex64::new(x * 0.3, y - 1.0 / 3.0));
        let back = ComplexField::from_csv(g, &f.to_csv()).unwrap();
        assert_eq!(f, back);
        assert!(ComplexField::from_csv(g, "i,j,re,im\n0,0,1,2\n").is_err());
    }
}
