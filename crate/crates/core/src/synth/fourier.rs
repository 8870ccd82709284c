//! Fourier analysis of targets and the pseudo-Fourier (incoherent) synthesis
//! route: each harmonic is exposed by its own N00N branch, which costs a
//! uniform background.

use std::collections::BTreeSet;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::scalar::{wrap_angle, Real};
use crate::states::{FixedMTerm, SuperpositionFixedM, Validate};

use super::quadrature::{PeriodicGrid, COEFFICIENT_POINTS};
use super::target::{TargetDescriptor, TargetPattern1D};

/// Coefficients relative to `max c_n` below which a harmonic (or one of its
/// cosine/sine components) counts as absent.
pub const RELATIVE_PRUNE: f64 = 1e-9;

/// `F_N(φ) = a_0 + Σ_{n=1}^{N} (a_n cos nφ + b_n sin nφ)`; `a_0` is the mean
/// and `b_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> FourierCoefficients<T> {
    pub fn order(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn evaluate(&self, phi: T) -> T {
        let mut s = self.a.first().copied().unwrap_or_else(T::zero);
        for n in 1..self.a.len() {
            let (sn, cn) = (T::from_count(n) * phi).sin_cos();
            s += self.a[n] * cn + self.b[n] * sn;
        }
        s
    }
}

impl<T: Real> TargetPattern1D<T> for FourierCoefficients<T> {
    fn value(&self, phi: T) -> T {
        self.evaluate(phi)
    }

    fn descriptor(&self) -> TargetDescriptor {
        TargetDescriptor::new("fourier-series").with("order", self.order() as f64)
    }
}

/// Coefficients up to `n_max` on the fine default grid.
pub fn fourier_coefficients<T: Real>(target: &dyn TargetPattern1D<T>, n_max: u32) -> Result<FourierCoefficients<T>> {
    fourier_coefficients_on(target, n_max, &PeriodicGrid::new(COEFFICIENT_POINTS)?)
}

pub fn fourier_coefficients_on<T: Real>(
    target: &dyn TargetPattern1D<T>,
    n_max: u32,
    grid: &PeriodicGrid<T>,
) -> Result<FourierCoefficients<T>> {
    let mut a = Vec::with_capacity(n_max as usize + 1);
    let mut b = Vec::with_capacity(n_max as usize + 1);
    a.push(grid.integrate_target(target, |_, f| f)? / T::two_pi());
    b.push(T::zero());
    for n in 1..=n_max {
        let nf = T::from_u32(n).unwrap();
        a.push(grid.integrate_target(target, |phi, f| f * (nf * phi).cos())? / T::PI());
        b.push(grid.integrate_target(target, |phi, f| f * (nf * phi).sin())? / T::PI());
    }
    Ok(FourierCoefficients { a, b })
}

/// `c (1 + cos(nφ + θ))`, one N00N branch of order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm<T> {
    pub n: u32,
    pub weight: T,
    pub phase: T,
}

/// Exposure program `P(φ) = t Σ c_n (1 + cos(nφ + θ_n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierProgram<T> {
    pub terms: Vec<FourierTerm<T>>,
    pub exposure_time: T,
}

impl<T: Real> Validate for FourierProgram<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if !(self.exposure_time > T::zero()) || !self.exposure_time.is_finite() {
            v.push(Violation::new("exposure_time", "must be positive and finite"));
        }
        let mut seen = BTreeSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            if !seen.insert(t.n) {
                v.push(Violation::new(format!("terms[{i}].n"), "duplicate harmonic"));
            }
            if !(t.weight >= T::zero()) || !t.weight.is_finite() {
                v.push(Violation::new(format!("terms[{i}].weight"), "must be finite and non-negative"));
            }
            if !t.phase.is_finite() {
                v.push(Violation::new(format!("terms[{i}].phase"), "must be finite"));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

impl<T: Real> FourierProgram<T> {
    /// Background rate `Q = Σ c_n`.
    pub fn penalty_rate(&self) -> T {
        self.terms.iter().fold(T::zero(), |s, t| s + t.weight)
    }

    pub fn exposure(&self, phi: T) -> T {
        let rate = self.terms.iter().fold(T::zero(), |s, t| {
            s + t.weight * (T::one() + (T::from_u32(t.n).unwrap() * phi + t.phase).cos())
        });
        rate * self.exposure_time
    }

    /// The oscillating part `P − Q t` as Fourier coefficients.
    pub fn oscillating_part(&self) -> FourierCoefficients<T> {
        let order = self.terms.iter().map(|t| t.n).max().unwrap_or(0) as usize;
        let mut a = vec![T::zero(); order + 1];
        let mut b = vec![T::zero(); order + 1];
        for t in &self.terms {
            let (s, c) = t.phase.sin_cos();
            let n = t.n as usize;
            a[n] += t.weight * c * self.exposure_time;
            b[n] -= t.weight * s * self.exposure_time;
        }
        FourierCoefficients { a, b }
    }

    /// Realizes the program as a fixed-`m = 0` superposition on a substrate
    /// responsive to every order present. Returns the state and the physical
    /// exposure time; the order-`n` N00N rate carries `1/2^n`, so weights
    /// `|α_n|² ∝ c_n 2^n` restore the program.
    pub fn to_fixed_m_state(&self) -> Result<(SuperpositionFixedM<T>, T)> {
        self.check()?;
        let terms: Vec<_> = self.terms.iter().filter(|t| t.weight > T::zero()).collect();
        if terms.is_empty() {
            return Err(Error::usage("program has no exposing terms"));
        }
        if terms.iter().any(|t| t.n == 0) {
            return Err(Error::usage("a constant term has no photon-number branch"));
        }
        let scaled: Vec<T> = terms.iter().map(|t| t.weight * T::lit(2.0).powi(t.n as i32)).collect();
        let total = scaled.iter().fold(T::zero(), |s, &w| s + w);
        let state = SuperpositionFixedM::normalized(
            0,
            terms
                .iter()
                .zip(&scaled)
                .map(|(t, &w)| FixedMTerm {
                    n: t.n,
                    theta: t.phase,
                    amplitude: Complex::new((w / total).sqrt(), T::zero()),
                })
                .collect(),
        )?;
        Ok((state, self.exposure_time * total))
    }
}

/// Polar form of the harmonics `n ≥ 1`: `c_n = √(a_n² + b_n²)` and
/// `θ_n = atan2(−b_n, a_n)`, so that `c_n cos(nφ + θ_n) = a_n cos nφ + b_n sin nφ`.
///
/// The constant `a_0` has no photon-number branch and is dropped. Components
/// below `RELATIVE_PRUNE · max c_n` are treated as zero, which keeps
/// quadrature noise out of the phases.
pub fn to_fourier_program<T: Real>(coeffs: &FourierCoefficients<T>, t: T) -> Result<FourierProgram<T>> {
    if coeffs.a.len() != coeffs.b.len() {
        return Err(Error::usage("coefficient vectors differ in length"));
    }
    if coeffs.a.iter().chain(&coeffs.b).any(|x| !x.is_finite()) {
        return Err(Error::numeric("non-finite Fourier coefficient"));
    }
    let scale = (1..coeffs.a.len()).fold(T::zero(), |m, n| m.max(coeffs.a[n].hypot(coeffs.b[n])));
    let floor = scale * T::lit(RELATIVE_PRUNE);
    let mut terms = Vec::new();
    for n in 1..coeffs.a.len() {
        let snap = |x: T| if x.abs() <= floor { T::zero() } else { x };
        let (a, b) = (snap(coeffs.a[n]), snap(coeffs.b[n]));
        let c = a.hypot(b);
        if c <= floor || c == T::zero() {
            continue;
        }
        terms.push(FourierTerm {
            n: n as u32,
            weight: c,
            phase: wrap_angle((-b).atan2(a)),
        });
    }
    let program = FourierProgram { terms, exposure_time: t };
    program.check()?;
    Ok(program)
}

pub fn program_exposure<T: Real>(program: &FourierProgram<T>, phi: T) -> T {
    program.exposure(phi)
}

/// `D_N = ∫|F − F_N|²` on the fine default grid.
pub fn distance_dn<T: Real>(target: &dyn TargetPattern1D<T>, n: u32) -> Result<T> {
    distance_dn_on(target, n, &PeriodicGrid::new(COEFFICIENT_POINTS)?)
}

pub fn distance_dn_on<T: Real>(target: &dyn TargetPattern1D<T>, n: u32, grid: &PeriodicGrid<T>) -> Result<T> {
    let coeffs = fourier_coefficients_on(target, n, grid)?;
    residual_on(target, &|phi| coeffs.evaluate(phi), grid)
}

fn residual_on<T: Real>(target: &dyn TargetPattern1D<T>, achieved: &dyn Fn(T) -> T, grid: &PeriodicGrid<T>) -> Result<T> {
    grid.integrate_target(target, |phi, f| {
        let d = f - achieved(phi);
        d * d
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationReport<T> {
    /// `∫|F − P_N|²`.
    pub residual: T,
    /// `D_N`.
    pub distance: T,
    pub epsilon: T,
    pub ok: bool,
    /// `D_N` vanishes while the residual does not: the target is band-limited
    /// and the criterion says nothing.
    pub degenerate: bool,
}

/// Whether `∫|F − P_N|² ≤ ε D_N`.
pub fn approximation_ok<T: Real>(
    target: &dyn TargetPattern1D<T>,
    achieved: &dyn Fn(T) -> T,
    n: u32,
    epsilon: T,
) -> Result<ApproximationReport<T>> {
    approximation_ok_on(target, achieved, n, epsilon, &PeriodicGrid::new(COEFFICIENT_POINTS)?)
}

pub fn approximation_ok_on<T: Real>(
    target: &dyn TargetPattern1D<T>,
    achieved: &dyn Fn(T) -> T,
    n: u32,
    epsilon: T,
    grid: &PeriodicGrid<T>,
) -> Result<ApproximationReport<T>> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::usage("epsilon must be positive"));
    }
    let residual = residual_on(target, achieved, grid)?;
    if !residual.is_finite() {
        return Err(Error::numeric("achieved pattern is not finite"));
    }
    let distance = distance_dn_on(target, n, grid)?;
    let energy = grid.integrate_target(target, |_, f| f * f)?;
    let tiny = T::lit(1e-12) * energy.max(T::one());
    let degenerate = distance <= tiny && residual > tiny;
    let ok = residual <= epsilon * distance || (distance <= tiny && residual <= tiny);
    Ok(ApproximationReport {
        residual,
        distance,
        epsilon,
        ok: ok && !degenerate,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deposition::fixed_m_superposition_rate;
    use crate::synth::target::{FnTarget1D, Trench};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn trench_tail(n: u32) -> f64 {
        // (4h²/π) Σ_{2q+1 > n} 1/(2q+1)², using Σ_{q≥0} 1/(2q+1)² = π²/8.
        let head: f64 = (0..)
            .map(|q| 2 * q + 1)
            .take_while(|&k| k <= n)
            .map(|k| 1.0 / (k as f64 * k as f64))
            .sum();
        4.0 / PI * (PI * PI / 8.0 - head)
    }

    #[test]
    fn trench_coefficients() {
        let t = Trench::new(1.0_f64).unwrap();
        let c = fourier_coefficients(&t, 10).unwrap();
        assert!((c.a[0] - 0.5).abs() < 1e-12);
        for n in 1..=10 {
            assert!((c.a[n] - t.cosine_coefficient(n as u32)).abs() < 1e-8, "a_{n} = {}", c.a[n]);
            assert!(c.b[n].abs() < 1e-12);
        }
    }

    #[test]
    fn pure_harmonics() {
        let f = FnTarget1D::new("c", |p: f64| (2.0 * p).cos());
        let c = fourier_coefficients_on(&f, 4, &PeriodicGrid::new(64).unwrap()).unwrap();
        for n in 0..=4 {
            let want = if n == 2 { 1.0 } else { 0.0 };
            assert!((c.a[n] - want).abs() < 1e-14 && c.b[n].abs() < 1e-14);
        }
        let k = FnTarget1D::new("k", |_: f64| 3.0);
        let c = fourier_coefficients_on(&k, 3, &PeriodicGrid::new(64).unwrap()).unwrap();
        assert!((c.a[0] - 3.0).abs() < 1e-14);
        assert!(c.a[1..].iter().chain(&c.b).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn polar_form() {
        let p = to_fourier_program(&FourierCoefficients { a: vec![0.0, 1.0], b: vec![0.0, 0.0] }, 1.0).unwrap();
        assert_eq!((p.terms[0].weight, p.terms[0].phase), (1.0, 0.0));
        let p = to_fourier_program(
            &FourierCoefficients { a: vec![0.0, 0.0, 0.0, -1.0 / 3.0], b: vec![0.0; 4] },
            1.0,
        )
        .unwrap();
        assert_eq!(p.terms.len(), 1);
        assert_eq!((p.terms[0].n, p.terms[0].weight, p.terms[0].phase), (3, 1.0 / 3.0, PI));
    }

    #[test]
    fn trench_program() {
        let t = Trench::new(1.0).unwrap();
        let prog = to_fourier_program(&fourier_coefficients(&t, 10).unwrap(), 1.0).unwrap();
        assert_eq!(prog.terms.iter().map(|t| t.n).collect::<Vec<_>>(), vec![1, 3, 5, 7, 9]);
        for term in &prog.terms {
            let q = (term.n - 1) / 2;
            assert_eq!(term.phase, if q % 2 == 1 { PI } else { 0.0 });
        }
        // At φ = π every odd harmonic with its phase contributes −(−1)^q c_q.
        let direct: f64 = (0..5)
            .map(|q| {
                let c = 2.0 / (PI * (2 * q + 1) as f64);
                let kappa = if q % 2 == 1 { PI } else { 0.0 };
                c * (1.0 + ((2 * q + 1) as f64 * PI + kappa).cos())
            })
            .sum();
        let want = 4.0 / PI * (1.0 / 3.0 + 1.0 / 7.0);
        assert!((direct - want).abs() < 1e-12);
        assert!((prog.exposure(PI) - want).abs() < 1e-7);
        let grid = PeriodicGrid::new(256).unwrap();
        let mean = grid.integrate(|p| prog.exposure(p)) / (2.0 * PI);
        assert!((mean - prog.penalty_rate()).abs() < 1e-12);
        let min = grid.nodes().into_iter().map(|p| prog.exposure(p)).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
    }

    #[test]
    fn oscillating_part_is_fourier_series() {
        let prog = FourierProgram {
            terms: vec![
                FourierTerm { n: 1, weight: 0.4, phase: 0.3 },
                FourierTerm { n: 3, weight: 0.2, phase: 4.0 },
                FourierTerm { n: 4, weight: 0.1, phase: PI },
            ],
            exposure_time: 2.0,
        };
        let q = prog.penalty_rate() * prog.exposure_time;
        let f = FnTarget1D::new("p", |p: f64| prog.exposure(p) - q);
        let got = fourier_coefficients_on(&f, 6, &PeriodicGrid::new(64).unwrap()).unwrap();
        let want = prog.oscillating_part();
        for n in 0..=6 {
            let (a, b) = (want.a.get(n).copied().unwrap_or(0.0), want.b.get(n).copied().unwrap_or(0.0));
            assert!((got.a[n] - a).abs() < 1e-8 && (got.b[n] - b).abs() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn fixed_m_realization() {
        let prog = to_fourier_program(&fourier_coefficients(&Trench::new(1.0).unwrap(), 10).unwrap(), 0.5).unwrap();
        let (state, t) = prog.to_fixed_m_state().unwrap();
        for &phi in &[0.0, 0.7, PI, 4.0] {
            let p = fixed_m_superposition_rate(&state, phi).unwrap() * t;
            assert!((p - prog.exposure(phi)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_program() {
        let p = FourierProgram::<f64> { terms: vec![], exposure_time: 1.0 };
        assert_eq!(p.exposure(1.3), 0.0);
        assert!(p.to_fixed_m_state().is_err());
        let bad = FourierProgram { terms: vec![FourierTerm { n: 1, weight: -1.0, phase: 0.0 }], exposure_time: 1.0 };
        assert!(bad.check().is_err());
    }

    #[test]
    fn trench_distance_matches_tail() {
        let t = Trench::new(1.0).unwrap();
        let mut last = f64::INFINITY;
        for n in [0, 1, 3, 5, 10] {
            let d = distance_dn(&t, n).unwrap();
            assert!((d - trench_tail(n)).abs() < 1e-6, "N = {n}: {d} vs {}", trench_tail(n));
            assert!(d <= last + 1e-15);
            last = d;
        }
    }

    #[test]
    fn band_limited_distance() {
        let f = FnTarget1D::new("s", |p: f64| 1.0 + 0.5 * (3.0 * p).sin());
        assert!(distance_dn_on(&f, 3, &PeriodicGrid::new(64).unwrap()).unwrap() < 1e-28);
    }

    #[test]
    fn approximation_cases() {
        let t = Trench::new(1.0).unwrap();
        let grid = PeriodicGrid::new(4096).unwrap();
        // Off the jumps, F reproduces itself exactly.
        let shifted = PeriodicGrid::with_offset(4096, 1e-3).unwrap();
        let exact = approximation_ok_on(&t, &|p| t.value(p), 10, 1e-3, &shifted).unwrap();
        assert!(exact.ok && exact.residual == 0.0);
        let coeffs = fourier_coefficients_on(&t, 10, &grid).unwrap();
        let trunc = approximation_ok_on(&t, &|p| coeffs.evaluate(p), 10, 1.0, &grid).unwrap();
        assert!(trunc.ok);
        assert!(!approximation_ok_on(&t, &|p| coeffs.evaluate(p), 10, 0.5, &grid).unwrap().ok);

        // The background Q t adds (Q t − a_0)² 2π on top of the truncation error.
        let prog = to_fourier_program(&coeffs, 1.0).unwrap();
        let r = approximation_ok_on(&t, &|p| prog.exposure(p), 10, 1.0, &grid).unwrap();
        let offset = prog.penalty_rate() - coeffs.a[0];
        assert!((r.residual - (r.distance + 2.0 * PI * offset * offset)).abs() < 1e-9);
        assert!(!r.ok);

        let smooth = FnTarget1D::new("s", |p: f64| 1.0 + p.cos());
        let d = approximation_ok_on(&smooth, &|_| 1.0, 1, 10.0, &PeriodicGrid::new(64).unwrap()).unwrap();
        assert!(d.degenerate && !d.ok);
        assert!(approximation_ok_on(&t, &|p| t.value(p), 10, 0.0, &grid).is_err());
    }

    #[test]
    fn grid_origin_shift() {
        let t = Trench::new(1.0).unwrap();
        let a = distance_dn_on(&t, 10, &PeriodicGrid::new(COEFFICIENT_POINTS).unwrap()).unwrap();
        let shifted = PeriodicGrid::with_offset(COEFFICIENT_POINTS, 2.0 * PI / COEFFICIENT_POINTS as f64 * 0.37).unwrap();
        let b = distance_dn_on(&t, 10, &shifted).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} {b}");
        let smooth = FnTarget1D::new("s", |p: f64| (p.cos() + 1.3).ln());
        let g0 = PeriodicGrid::new(256).unwrap();
        let g1 = PeriodicGrid::with_offset(256, 0.1234).unwrap();
        let f = |p: f64| smooth.value(p).powi(2);
        assert!((g0.integrate(f) - g1.integrate(f)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn program_exposure_nonnegative(
            w in prop::collection::vec(0.0f64..2.0, 1..6),
            ph in prop::collection::vec(0.0f64..7.0, 6),
            phi in 0.0f64..7.0,
        ) {
            let terms = w.iter().enumerate().map(|(i, &c)| FourierTerm { n: i as u32 + 1, weight: c, phase: ph[i] }).collect();
            let p = FourierProgram { terms, exposure_time: 1.5 };
            prop_assert!(p.exposure(phi) >= 0.0);
        }
    }
}
