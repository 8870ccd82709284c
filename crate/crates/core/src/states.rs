//! Entangled-state families and their superpositions.
//!
//! A 1D proto-state with `N` photons and distribution index `m` is the
//! two-branch ket
//!
//! ```text
//! ( e^{imφ} |N-m, m⟩ + e^{i(N-m)φ} e^{iθ} |m, N-m⟩ ) / √2
//! ```
//!
//! and the 2D proto-state spreads four branches over modes `a, b, c, d`.
//! Phases `φ` and `χ` are evaluation coordinates, so they are not part of
//! the value types here; only the state parameters are.
//!
//! When `N = 2m` both 1D branches are the same ket. The amplitudes are summed
//! before normalizing, which makes `θ = π` a null state: such states are
//! rejected by [`Validate`] and by the Fock-space builder alike.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::scalar::{wrap_angle, Real};

/// Amplitude norms must be unit within this tolerance.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Squared norm below which a summed degenerate branch counts as cancelled.
pub const NULL_BRANCH_WEIGHT: f64 = 1e-20;

pub trait Validate {
    /// Every violated invariant, or `Ok` when there are none.
    fn validate(&self) -> Result<(), Vec<Violation>>;

    fn check(&self) -> Result<()> {
        self.validate().map_err(Error::Validation)
    }
}

fn check_phase<T: Real>(path: &str, phase: T, out: &mut Vec<Violation>) {
    if !phase.is_finite() {
        out.push(Violation::new(path, "phase is not finite"));
    } else if phase < T::zero() || phase >= T::two_pi() {
        out.push(Violation::new(path, "phase outside [0, 2π)"));
    }
}

fn check_amplitude<T: Real>(path: &str, a: Complex<T>, out: &mut Vec<Violation>) {
    if !a.re.is_finite() || !a.im.is_finite() {
        out.push(Violation::new(path, "amplitude is not finite"));
    }
}

fn check_unit_norm<T: Real>(amps: impl Iterator<Item = Complex<T>>, out: &mut Vec<Violation>) {
    let total: T = amps.map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x);
    let dev = (total - T::one()).abs();
    if !(dev.to_f64().unwrap_or(f64::INFINITY) <= NORM_TOLERANCE) {
        out.push(Violation::new(
            "terms",
            format!("amplitudes have squared norm {total}, expected 1"),
        ));
    }
}

fn finish(v: Vec<Violation>) -> Result<(), Vec<Violation>> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Relative weight of a branch pair after summing amplitudes: 1 for distinct
/// kets, `1 + cos θ` when both branches coincide (`N = 2m`).
pub(crate) fn pair_weight<T: Real>(n: u32, m: u32, phase: T) -> T {
    if n == 2 * m {
        T::one() + phase.cos()
    } else {
        T::one()
    }
}

/// The elementary 1D state `|ψ_Nm⟩` with relative phase `θ_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtoState1D<T> {
    pub n: u32,
    pub m: u32,
    pub theta: T,
}

impl<T: Real> ProtoState1D<T> {
    /// Builds and validates; `theta` is wrapped into `[0, 2π)`.
    pub fn new(n: u32, m: u32, theta: T) -> Result<Self> {
        let s = Self {
            n,
            m,
            theta: wrap_angle(theta),
        };
        s.check()?;
        Ok(s)
    }

    /// The N00N state, `m = 0` and `θ = 0`.
    pub fn noon(n: u32) -> Result<Self> {
        Self::new(n, 0, T::zero())
    }

    pub fn is_degenerate(&self) -> bool {
        self.n == 2 * self.m
    }
}

impl<T: Real> Validate for ProtoState1D<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.n < 1 {
            v.push(Violation::new("n", "photon number must be at least 1"));
        }
        if self.m > self.n / 2 {
            v.push(Violation::new("m", "m exceeds ⌊N/2⌋"));
        }
        check_phase("theta", self.theta, &mut v);
        if v.is_empty() && pair_weight(self.n, self.m, self.theta).to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
            v.push(Violation::new("theta", "degenerate branches cancel (N = 2m, θ = π)"));
        }
        finish(v)
    }
}

/// The elementary four-mode state `|ψ^k_Nm⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtoState2D<T> {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub zeta: T,
    pub zeta_bar: T,
}

impl<T: Real> ProtoState2D<T> {
    pub fn new(n: u32, m: u32, k: u32, zeta: T, zeta_bar: T) -> Result<Self> {
        let s = Self {
            n,
            m,
            k,
            zeta: wrap_angle(zeta),
            zeta_bar: wrap_angle(zeta_bar),
        };
        s.check()?;
        Ok(s)
    }

    /// Squared norm of the unnormalized four-branch ket (prefactor 1/2 included).
    pub(crate) fn raw_norm_sqr(&self) -> T {
        let half = T::lit(0.5);
        half * (pair_weight(self.n, self.m, self.zeta) + pair_weight(self.n, self.k, self.zeta_bar))
    }
}

impl<T: Real> Validate for ProtoState2D<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.n < 1 {
            v.push(Violation::new("n", "photon number must be at least 1"));
        }
        if self.m > self.n / 2 {
            v.push(Violation::new("m", "m exceeds ⌊N/2⌋"));
        }
        if self.k > self.n / 2 {
            v.push(Violation::new("k", "k exceeds ⌊N/2⌋"));
        }
        check_phase("zeta", self.zeta, &mut v);
        check_phase("zeta_bar", self.zeta_bar, &mut v);
        if v.is_empty() && self.raw_norm_sqr().to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
            v.push(Violation::new("zeta", "all branches cancel"));
        }
        finish(v)
    }
}

/// One branch of a fixed-N superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Term1D<T> {
    pub m: u32,
    #[serde(default = "zero")]
    pub theta: T,
    pub amplitude: Complex<T>,
}

fn zero<T: Real>() -> T {
    T::zero()
}

/// `Σ_m α_m |ψ_Nm⟩`: every branch carries `N` photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SuperpositionFixedN<T> {
    pub n: u32,
    pub terms: Vec<Term1D<T>>,
}

impl<T: Real> SuperpositionFixedN<T> {
    pub fn new(n: u32, terms: Vec<Term1D<T>>) -> Result<Self> {
        let mut s = Self { n, terms };
        s.normalize_phases();
        s.check()?;
        Ok(s)
    }

    /// Like [`new`](Self::new) but rescales the amplitudes to unit norm first.
    pub fn normalized(n: u32, mut terms: Vec<Term1D<T>>) -> Result<Self> {
        normalize_amplitudes(terms.iter_mut().map(|t| &mut t.amplitude))?;
        Self::new(n, terms)
    }

    pub fn single(proto: ProtoState1D<T>) -> Self {
        Self {
            n: proto.n,
            terms: vec![Term1D {
                m: proto.m,
                theta: proto.theta,
                amplitude: Complex::new(T::one(), T::zero()),
            }],
        }
    }

    pub fn normalize_phases(&mut self) {
        for t in &mut self.terms {
            t.theta = wrap_angle(t.theta);
        }
    }

    pub fn proto(&self, i: usize) -> ProtoState1D<T> {
        let t = &self.terms[i];
        ProtoState1D {
            n: self.n,
            m: t.m,
            theta: t.theta,
        }
    }
}

impl<T: Real> Validate for SuperpositionFixedN<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.terms.is_empty() {
            v.push(Violation::new("terms", "superposition has no terms"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            if !seen.insert(t.m) {
                v.push(Violation::new(format!("terms[{i}].m"), "duplicate index"));
            }
            if let Err(inner) = self.proto(i).validate() {
                v.extend(inner.into_iter().map(|x| Violation::new(format!("terms[{i}].{}", x.path), x.message)));
            }
            check_amplitude(&format!("terms[{i}].amplitude"), t.amplitude, &mut v);
        }
        check_unit_norm(self.terms.iter().map(|t| t.amplitude), &mut v);
        finish(v)
    }
}

/// One branch of a fixed-m superposition: photon number `n` and its phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct FixedMTerm<T> {
    pub n: u32,
    #[serde(default = "zero")]
    pub theta: T,
    pub amplitude: Complex<T>,
}

/// `Σ_n α_n |ψ_nm⟩` with a shared distribution index `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SuperpositionFixedM<T> {
    pub m: u32,
    pub terms: Vec<FixedMTerm<T>>,
}

impl<T: Real> SuperpositionFixedM<T> {
    pub fn new(m: u32, terms: Vec<FixedMTerm<T>>) -> Result<Self> {
        let mut s = Self { m, terms };
        s.normalize_phases();
        s.check()?;
        Ok(s)
    }

    pub fn normalized(m: u32, mut terms: Vec<FixedMTerm<T>>) -> Result<Self> {
        normalize_amplitudes(terms.iter_mut().map(|t| &mut t.amplitude))?;
        Self::new(m, terms)
    }

    pub fn normalize_phases(&mut self) {
        for t in &mut self.terms {
            t.theta = wrap_angle(t.theta);
        }
    }

    pub fn proto(&self, i: usize) -> ProtoState1D<T> {
        let t = &self.terms[i];
        ProtoState1D {
            n: t.n,
            m: self.m,
            theta: t.theta,
        }
    }

    pub fn max_photons(&self) -> u32 {
        self.terms.iter().map(|t| t.n).max().unwrap_or(0)
    }
}

impl<T: Real> Validate for SuperpositionFixedM<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.terms.is_empty() {
            v.push(Violation::new("terms", "superposition has no terms"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            if !seen.insert(t.n) {
                v.push(Violation::new(format!("terms[{i}].n"), "duplicate index"));
            }
            if let Err(inner) = self.proto(i).validate() {
                v.extend(inner.into_iter().map(|x| Violation::new(format!("terms[{i}].{}", x.path), x.message)));
            }
            check_amplitude(&format!("terms[{i}].amplitude"), t.amplitude, &mut v);
        }
        check_unit_norm(self.terms.iter().map(|t| t.amplitude), &mut v);
        finish(v)
    }
}

/// One branch `α_mk |ψ^k_Nm⟩` of a 2D superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Term2D<T> {
    pub m: u32,
    pub k: u32,
    #[serde(default = "zero")]
    pub zeta: T,
    #[serde(default = "zero")]
    pub zeta_bar: T,
    pub amplitude: Complex<T>,
}

/// `Σ_{m,k} α_mk |ψ^k_Nm⟩` over four modes.
///
/// Proto-states sharing `m` or `k` overlap on two of their branches, so the
/// superposed ket is not unit-norm in general; the unit-norm invariant
/// applies to the coefficient vector `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Superposition2D<T> {
    pub n: u32,
    pub terms: Vec<Term2D<T>>,
}

impl<T: Real> Superposition2D<T> {
    pub fn new(n: u32, terms: Vec<Term2D<T>>) -> Result<Self> {
        let mut s = Self { n, terms };
        s.normalize_phases();
        s.check()?;
        Ok(s)
    }

    pub fn normalized(n: u32, mut terms: Vec<Term2D<T>>) -> Result<Self> {
        normalize_amplitudes(terms.iter_mut().map(|t| &mut t.amplitude))?;
        Self::new(n, terms)
    }

    pub fn single(proto: ProtoState2D<T>) -> Self {
        Self {
            n: proto.n,
            terms: vec![Term2D {
                m: proto.m,
                k: proto.k,
                zeta: proto.zeta,
                zeta_bar: proto.zeta_bar,
                amplitude: Complex::new(T::one(), T::zero()),
            }],
        }
    }

    pub fn normalize_phases(&mut self) {
        for t in &mut self.terms {
            t.zeta = wrap_angle(t.zeta);
            t.zeta_bar = wrap_angle(t.zeta_bar);
        }
    }

    pub fn proto(&self, i: usize) -> ProtoState2D<T> {
        let t = &self.terms[i];
        ProtoState2D {
            n: self.n,
            m: t.m,
            k: t.k,
            zeta: t.zeta,
            zeta_bar: t.zeta_bar,
        }
    }
}

impl<T: Real> Validate for Superposition2D<T> {
    fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.terms.is_empty() {
            v.push(Violation::new("terms", "superposition has no terms"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in self.terms.iter().enumerate() {
            if !seen.insert((t.m, t.k)) {
                v.push(Violation::new(format!("terms[{i}]"), "duplicate index"));
            }
            if let Err(inner) = self.proto(i).validate() {
                v.extend(inner.into_iter().map(|x| Violation::new(format!("terms[{i}].{}", x.path), x.message)));
            }
            check_amplitude(&format!("terms[{i}].amplitude"), t.amplitude, &mut v);
        }
        check_unit_norm(self.terms.iter().map(|t| t.amplitude), &mut v);
        finish(v)
    }
}

/// Scales amplitudes to unit norm; fails when they are all zero.
pub fn normalize_amplitudes<'a, T: Real>(amps: impl Iterator<Item = &'a mut Complex<T>>) -> Result<()> {
    let amps: Vec<_> = amps.collect();
    let total = amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
    if !(total > T::zero()) || !total.is_finite() {
        return Err(Error::usage("amplitude vector cannot be normalized"));
    }
    let scale = total.sqrt().recip();
    for a in amps {
        *a *= scale;
    }
    Ok(())
}

/// Polar form `(r, ξ)` of `α_m* α_m'`, with `ξ` in `[0, 2π)`.
pub fn derived_cross_weights<T: Real>(alpha_m: Complex<T>, alpha_mp: Complex<T>) -> (T, T) {
    let z = alpha_m.conj() * alpha_mp;
    let r = z.norm();
    if r == T::zero() {
        return (r, T::zero());
    }
    (r, wrap_angle(z.arg()))
}
