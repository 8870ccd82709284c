//! Target exposure patterns over `[0, 2π)` and `[0, 2π)²`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

/// Name and parameters of a target, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetDescriptor {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl TargetDescriptor {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }
}

pub trait TargetPattern1D<T: Real>: Send + Sync {
    fn value(&self, phi: T) -> T;

    /// One-sided limits `(F(φ⁻), F(φ⁺))`; equal wherever `F` is continuous.
    fn limits(&self, phi: T) -> (T, T) {
        let v = self.value(phi);
        (v, v)
    }

    fn descriptor(&self) -> TargetDescriptor;
}

pub trait TargetPattern2D<T: Real>: Send + Sync {
    fn value(&self, phi: T, chi: T) -> T;

    fn descriptor(&self) -> TargetDescriptor;
}

/// Maps an angle into `[-π, π)`.
fn centered<T: Real>(x: T) -> T {
    let w = wrap_angle(x);
    if w >= T::PI() {
        w - T::two_pi()
    } else {
        w
    }
}

fn near<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::epsilon() * T::lit(64.0)
}

/// Height `h` on `[-π/2, π/2)` (mod 2π), zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trench<T> {
    pub h: T,
}

impl<T: Real> Trench<T> {
    pub fn new(h: T) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::usage("trench height must be positive"));
        }
        Ok(Self { h })
    }

    /// Exact Fourier coefficient `a_n` of the trench (`b_n` vanish).
    pub fn cosine_coefficient(&self, n: u32) -> T {
        if n == 0 {
            return self.h / T::lit(2.0);
        }
        if n.is_multiple_of(2) {
            return T::zero();
        }
        let q = (n - 1) / 2;
        let sign = if q.is_multiple_of(2) { T::one() } else { -T::one() };
        sign * T::lit(2.0) * self.h / (T::PI() * T::from_u32(n).unwrap())
    }
}

impl<T: Real> TargetPattern1D<T> for Trench<T> {
    fn value(&self, phi: T) -> T {
        let x = centered(phi);
        let edge = T::FRAC_PI_2();
        if x >= -edge && x < edge {
            self.h
        } else {
            T::zero()
        }
    }

    fn limits(&self, phi: T) -> (T, T) {
        let x = centered(phi);
        let edge = T::FRAC_PI_2();
        if near(x, -edge) {
            (T::zero(), self.h)
        } else if near(x, edge) {
            (self.h, T::zero())
        } else {
            let v = self.value(phi);
            (v, v)
        }
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("trench").with("h", self.h.to_f64().unwrap())
    }
}

/// Any smooth closure as a target.
pub struct FnTarget1D<F> {
    f: F,
    name: String,
}

impl<F> FnTarget1D<F> {
    pub fn new(name: &str, f: F) -> Self {
        Self { f, name: name.to_owned() }
    }
}

impl<T: Real, F: Fn(T) -> T + Send + Sync> TargetPattern1D<T> for FnTarget1D<F> {
    fn value(&self, phi: T) -> T {
        (self.f)(wrap_angle(phi))
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new(&self.name)
    }
}

/// Tabulated target, periodic linear interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTarget1D<T> {
    phis: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> SampledTarget1D<T> {
    /// Samples must have strictly increasing `φ` within `[0, 2π)` and
    /// finite, non-negative values.
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::usage("sampled target needs at least one sample"));
        }
        for (i, &(phi, v)) in samples.iter().enumerate() {
            if !(phi >= T::zero() && phi < T::two_pi()) {
                return Err(Error::usage(format!("sample {i}: φ = {phi} outside [0, 2π)")));
            }
            if !v.is_finite() || v < T::zero() {
                return Err(Error::usage(format!("sample {i}: value {v} is not a finite non-negative number")));
            }
            if i > 0 && !(phi > samples[i - 1].0) {
                return Err(Error::usage(format!("sample {i}: φ values must be strictly increasing")));
            }
        }
        let (phis, values) = samples.into_iter().unzip();
        Ok(Self { phis, values })
    }
}

impl<T: Real> TargetPattern1D<T> for SampledTarget1D<T> {
    fn value(&self, phi: T) -> T {
        let n = self.phis.len();
        if n == 1 {
            return self.values[0];
        }
        let x = wrap_angle(phi);
        // first sample strictly above x
        let hi = self.phis.partition_point(|&p| p <= x);
        let (i0, i1) = if hi == 0 || hi == n { (n - 1, 0) } else { (hi - 1, hi) };
        let (p0, p1) = (self.phis[i0], self.phis[i1]);
        let span = wrap_angle(p1 - p0);
        let span = if span == T::zero() { T::two_pi() } else { span };
        let s = wrap_angle(x - p0) / span;
        self.values[i0] + (self.values[i1] - self.values[i0]) * s
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("sampled").with("samples", self.phis.len() as f64)
    }
}

/// Height `h` on the square `[-w, w)²` (coordinates mod 2π), zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareRegion<T> {
    pub h: T,
    pub half_width: T,
}

impl<T: Real> SquareRegion<T> {
    pub fn new(h: T, half_width: T) -> Result<Self> {
        if !(h > T::zero()) || !(half_width > T::zero() && half_width <= T::PI()) {
            return Err(Error::usage("square needs h > 0 and 0 < half_width ≤ π"));
        }
        Ok(Self { h, half_width })
    }
}

impl<T: Real> TargetPattern2D<T> for SquareRegion<T> {
    fn value(&self, phi: T, chi: T) -> T {
        let inside = |x: T| {
            let c = centered(x);
            c >= -self.half_width && c < self.half_width
        };
        if inside(phi) && inside(chi) {
            self.h
        } else {
            T::zero()
        }
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("square")
            .with("h", self.h.to_f64().unwrap())
            .with("half_width", self.half_width.to_f64().unwrap())
    }
}

/// One `(p, q)` block of a 2D Fourier series:
/// `a cos pφ cos qχ + b cos pφ sin qχ + c sin pφ cos qχ + d sin pφ sin qχ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Fourier2DTerm<T> {
    pub p: u32,
    pub q: u32,
    #[serde(default)]
    pub a: T,
    #[serde(default)]
    pub b: T,
    #[serde(default)]
    pub c: T,
    #[serde(default)]
    pub d: T,
}

/// Target given by a finite 2D Fourier series; the four blocks are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries2D<T> {
    pub terms: Vec<Fourier2DTerm<T>>,
}

impl<T: Real> TargetPattern2D<T> for FourierSeries2D<T> {
    fn value(&self, phi: T, chi: T) -> T {
        self.terms.iter().fold(T::zero(), |s, t| {
            let (sp, cp) = (T::from_u32(t.p).unwrap() * phi).sin_cos();
            let (sq, cq) = (T::from_u32(t.q).unwrap() * chi).sin_cos();
            s + t.a * cp * cq + t.b * cp * sq + t.c * sp * cq + t.d * sp * sq
        })
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("fourier-2d").with("terms", self.terms.len() as f64)
    }
}

/// Extracts the 2D Fourier blocks up to `(p_max, q_max)` on a product grid.
///
/// `a_00` is the mean; the `p = 0` or `q = 0` rows carry the usual factor
/// of two relative to the mixed terms.
pub fn fourier_coefficients_2d<T: Real>(
    target: &dyn TargetPattern2D<T>,
    p_max: u32,
    q_max: u32,
    grid: &super::quadrature::ProductGrid<T>,
) -> Result<FourierSeries2D<T>> {
    let samples = grid.sample(target)?;
    let (np, nq) = (grid.phi.points(), grid.chi.points());
    let pi = T::PI();
    let mut terms = Vec::new();
    for p in 0..=p_max {
        for q in 0..=q_max {
            let mut acc = [T::zero(); 4];
            for i in 0..np {
                let (sp, cp) = (T::from_u32(p).unwrap() * grid.phi.node(i)).sin_cos();
                for j in 0..nq {
                    let (sq, cq) = (T::from_u32(q).unwrap() * grid.chi.node(j)).sin_cos();
                    let f = samples[i * nq + j];
                    acc[0] += f * cp * cq;
                    acc[1] += f * cp * sq;
                    acc[2] += f * sp * cq;
                    acc[3] += f * sp * sq;
                }
            }
            let norm = match (p, q) {
                (0, 0) => pi * pi * T::lit(4.0),
                (0, _) | (_, 0) => pi * pi * T::lit(2.0),
                _ => pi * pi,
            };
            let w = grid.weight() / norm;
            terms.push(Fourier2DTerm {
                p,
                q,
                a: acc[0] * w,
                b: acc[1] * w,
                c: acc[2] * w,
                d: acc[3] * w,
            });
        }
    }
    Ok(FourierSeries2D { terms })
}

pub struct FnTarget2D<F> {
    f: F,
    name: String,
}

impl<F> FnTarget2D<F> {
    pub fn new(name: &str, f: F) -> Self {
        Self { f, name: name.to_owned() }
    }
}

impl<T: Real, F: Fn(T, T) -> T + Send + Sync> TargetPattern2D<T> for FnTarget2D<F> {
    fn value(&self, phi: T, chi: T) -> T {
        (self.f)(wrap_angle(phi), wrap_angle(chi))
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new(&self.name)
    }
}

/// Target tabulated on a regular `φ × χ` lattice over `[0, 2π)²`,
/// periodic bilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTarget2D<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Real> SampledTarget2D<T> {
    /// `values[i * cols + j]` is the target at `(2πi/rows, 2πj/cols)`.
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::usage(format!(
                "expected a {rows}x{cols} lattice, got {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::usage("lattice values must be finite and non-negative"));
        }
        Ok(Self { rows, cols, values })
    }

    /// Builds from `(φ, χ, value)` triples that cover a regular lattice.
    pub fn from_triples(mut samples: Vec<(T, T, T)>) -> Result<Self> {
        let tol = T::lit(1e-9);
        let key = |x: T| (x / tol).round().to_i64().unwrap_or(i64::MAX);
        samples.sort_by_key(|a| (key(a.0), key(a.1)));
        let mut phis: Vec<i64> = samples.iter().map(|s| key(s.0)).collect();
        phis.dedup();
        let rows = phis.len();
        if rows == 0 || !samples.len().is_multiple_of(rows) {
            return Err(Error::usage("2D samples do not form a regular lattice"));
        }
        let cols = samples.len() / rows;
        for (i, s) in samples.iter().enumerate() {
            let (r, c) = (i / cols, i % cols);
            let want_phi = T::two_pi() * T::from_count(r) / T::from_count(rows);
            let want_chi = T::two_pi() * T::from_count(c) / T::from_count(cols);
            if (s.0 - want_phi).abs() > T::lit(1e-6) || (s.1 - want_chi).abs() > T::lit(1e-6) {
                return Err(Error::usage(format!(
                    "2D samples must lie on the uniform {rows}x{cols} lattice starting at 0"
                )));
            }
        }
        Self::new(rows, cols, samples.into_iter().map(|s| s.2).collect())
    }
}

impl<T: Real> TargetPattern2D<T> for SampledTarget2D<T> {
    fn value(&self, phi: T, chi: T) -> T {
        let fr = wrap_angle(phi) / T::two_pi() * T::from_count(self.rows);
        let fc = wrap_angle(chi) / T::two_pi() * T::from_count(self.cols);
        let (r0, c0) = (fr.floor(), fc.floor());
        let (sr, sc) = (fr - r0, fc - c0);
        let r0 = r0.to_usize().unwrap() % self.rows;
        let c0 = c0.to_usize().unwrap() % self.cols;
        let (r1, c1) = ((r0 + 1) % self.rows, (c0 + 1) % self.cols);
        let at = |r: usize, c: usize| self.values[r * self.cols + c];
        let one = T::one();
        at(r0, c0) * (one - sr) * (one - sc) + at(r1, c0) * sr * (one - sc) + at(r0, c1) * (one - sr) * sc
            + at(r1, c1) * sr * sc
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("sampled-2d")
            .with("rows", self.rows as f64)
            .with("cols", self.cols as f64)
    }
}
