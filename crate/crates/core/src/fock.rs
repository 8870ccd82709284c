//! Sparse multimode Fock-space vectors and bosonic ladder operators.
//!
//! This is the brute-force reference for every closed-form rate in
//! [`crate::deposition`]: states are expanded into occupation-number kets and
//! the `N`-th field moment is evaluated by applying annihilators one photon at
//! a time. Nothing here uses binomial coefficients or the trigonometric forms
//! of the rates.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::states::{
    ProtoState1D, ProtoState2D, Superposition2D, SuperpositionFixedM, SuperpositionFixedN, Validate,
    NULL_BRANCH_WEIGHT,
};

/// Amplitudes with modulus at or below this are dropped from the map.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Occupation numbers, one per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OccupationTuple(Vec<u32>);

impl OccupationTuple {
    pub fn new(occupations: impl Into<Vec<u32>>) -> Self {
        Self(occupations.into())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<&[u32]> for OccupationTuple {
    fn from(v: &[u32]) -> Self {
        Self(v.to_vec())
    }
}

/// Sparse state vector over occupation tuples of a fixed mode count.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    mode_count: usize,
    cutoff: u32,
    amplitudes: BTreeMap<OccupationTuple, Complex<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn zero(mode_count: usize, cutoff: u32) -> Self {
        Self {
            mode_count,
            cutoff,
            amplitudes: BTreeMap::new(),
        }
    }

    /// A single basis ket with unit amplitude.
    pub fn basis(occupations: &[u32], cutoff: u32) -> Result<Self> {
        let mut v = Self::zero(occupations.len(), cutoff);
        v.add_term(occupations, Complex::new(T::one(), T::zero()))?;
        Ok(v)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationTuple, &Complex<T>)> {
        self.amplitudes.iter()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex<T> {
        self.amplitudes
            .get(&OccupationTuple::from(occupations))
            .copied()
            .unwrap_or_else(Complex::default)
    }

    /// Adds `amp` to the coefficient of `occupations`.
    pub fn add_term(&mut self, occupations: &[u32], amp: Complex<T>) -> Result<()> {
        if occupations.len() != self.mode_count {
            return Err(Error::usage(format!(
                "occupation tuple has {} modes, vector has {}",
                occupations.len(),
                self.mode_count
            )));
        }
        if occupations.iter().any(|&n| n > self.cutoff) {
            return Err(Error::Capacity {
                tuple: occupations.to_vec(),
                cutoff: self.cutoff,
            });
        }
        let entry = self
            .amplitudes
            .entry(OccupationTuple::from(occupations))
            .or_default();
        *entry += amp;
        Ok(())
    }

    pub fn prune(&mut self) {
        let eps = T::lit(PRUNE_THRESHOLD);
        self.amplitudes.retain(|_, a| a.norm() > eps);
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().fold(T::zero(), |s, a| s + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small.amplitudes.iter().fold(Complex::default(), |acc, (k, a)| match large.amplitudes.get(k) {
            Some(b) if conj_small => acc + a.conj() * b,
            Some(b) => acc + b.conj() * a,
            None => acc,
        })
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        for a in out.amplitudes.values_mut() {
            *a *= c;
        }
        out.prune();
        out
    }

    /// `self + other`; the result carries the larger cutoff.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.mode_count != other.mode_count {
            return Err(Error::usage("cannot add vectors with different mode counts"));
        }
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        for (k, a) in &other.amplitudes {
            out.add_term(k.as_slice(), *a)?;
        }
        out.prune();
        Ok(out)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::usage(format!(
                "mode index {mode} out of range for {} modes",
                self.mode_count
            )));
        }
        Ok(())
    }
}

/// Applies the annihilator of `mode`: `|…n…⟩ ↦ √n |…n−1…⟩`.
pub fn annihilate<T: Real>(state: &FockVector<T>, mode: usize) -> Result<FockVector<T>> {
    state.check_mode(mode)?;
    let mut out = FockVector::zero(state.mode_count, state.cutoff);
    for (occ, a) in state.iter() {
        let n = occ.as_slice()[mode];
        if n == 0 {
            continue;
        }
        let mut lowered = occ.as_slice().to_vec();
        lowered[mode] -= 1;
        out.add_term(&lowered, *a * T::from_u32(n).unwrap().sqrt())?;
    }
    out.prune();
    Ok(out)
}

/// Applies the creator of `mode`: `|…n…⟩ ↦ √(n+1) |…n+1…⟩`.
pub fn create<T: Real>(state: &FockVector<T>, mode: usize) -> Result<FockVector<T>> {
    state.check_mode(mode)?;
    let mut out = FockVector::zero(state.mode_count, state.cutoff);
    for (occ, a) in state.iter() {
        let mut raised = occ.as_slice().to_vec();
        raised[mode] += 1;
        let n1 = raised[mode];
        out.add_term(&raised, *a * T::from_u32(n1).unwrap().sqrt())?;
    }
    out.prune();
    Ok(out)
}

fn check_mode_set<T: Real>(state: &FockVector<T>, modes: &[usize]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::usage("mode set is empty"));
    }
    for (i, &m) in modes.iter().enumerate() {
        state.check_mode(m)?;
        if modes[..i].contains(&m) {
            return Err(Error::usage(format!("mode {m} listed twice")));
        }
    }
    Ok(())
}

/// Applies `ê = (Σ_{i∈modes} â_i) / √|modes|` once.
pub fn superposed_mode_annihilate<T: Real>(state: &FockVector<T>, modes: &[usize]) -> Result<FockVector<T>> {
    check_mode_set(state, modes)?;
    let scale = Complex::new(T::from_count(modes.len()).sqrt().recip(), T::zero());
    let mut acc = FockVector::zero(state.mode_count, state.cutoff);
    for &m in modes {
        acc = acc.plus(&annihilate(state, m)?)?;
    }
    Ok(acc.scaled(scale))
}

fn apply_field_power<T: Real>(state: &FockVector<T>, modes: &[usize], order: u32) -> Result<FockVector<T>> {
    let mut v = state.clone();
    for _ in 0..order {
        v = superposed_mode_annihilate(&v, modes)?;
    }
    Ok(v)
}

fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_u32(i).unwrap())
}

/// `⟨bra| (ê†)^N ê^N |ket⟩ / N!`, with no normalization requirement.
pub fn deposition_bilinear<T: Real>(
    bra: &FockVector<T>,
    ket: &FockVector<T>,
    modes: &[usize],
    order: u32,
) -> Result<Complex<T>> {
    if order < 1 {
        return Err(Error::usage("moment order must be at least 1"));
    }
    if bra.mode_count != ket.mode_count {
        return Err(Error::usage("bra and ket have different mode counts"));
    }
    let lb = apply_field_power(bra, modes, order)?;
    let lk = apply_field_power(ket, modes, order)?;
    Ok(lb.inner(&lk) / factorial::<T>(order))
}

/// `‖ê^N |ψ⟩‖² / N!` for a unit-norm state.
pub fn deposition_expectation<T: Real>(state: &FockVector<T>, modes: &[usize], order: u32) -> Result<T> {
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    let norm = state.norm();
    if !((norm - T::one()).abs() <= tol) {
        return Err(Error::NotNormalized {
            norm: norm.to_f64().unwrap_or(f64::NAN),
        });
    }
    if order < 1 {
        return Err(Error::usage("moment order must be at least 1"));
    }
    let lowered = apply_field_power(state, modes, order)?;
    Ok(lowered.norm_sqr() / factorial::<T>(order))
}

fn phase<T: Real>(angle: T) -> Complex<T> {
    Complex::from_polar(T::one(), angle)
}

fn normalize_built<T: Real>(mut v: FockVector<T>) -> Result<FockVector<T>> {
    let n2 = v.norm_sqr();
    if n2.to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
        return Err(Error::Validation(vec![crate::error::Violation::new(
            "phases",
            "branches cancel to the null vector",
        )]));
    }
    v = v.scaled(Complex::new(n2.sqrt().recip(), T::zero()));
    Ok(v)
}

/// Expands a 1D proto-state into a two-mode ket at phase `φ`, cutoff `N`.
pub fn proto_ket_1d<T: Real>(spec: &ProtoState1D<T>, phi: T) -> Result<FockVector<T>> {
    proto_ket_1d_with_cutoff(spec, phi, spec.n)
}

fn proto_ket_1d_with_cutoff<T: Real>(spec: &ProtoState1D<T>, phi: T, cutoff: u32) -> Result<FockVector<T>> {
    spec.check()?;
    let (n, m) = (spec.n, spec.m);
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let nf = T::from_u32(n).unwrap();
    let mf = T::from_u32(m).unwrap();
    let mut v = FockVector::zero(2, cutoff);
    v.add_term(&[n - m, m], phase(mf * phi) * h)?;
    v.add_term(&[m, n - m], phase((nf - mf) * phi + spec.theta) * h)?;
    normalize_built(v)
}

/// Expands a 2D proto-state into a four-mode ket at phases `(φ, χ)`, cutoff `N`.
///
/// The third branch carries `e^{ikχ}`, matching the `χ` dependence of the
/// fourth branch.
pub fn proto_ket_2d<T: Real>(spec: &ProtoState2D<T>, phi: T, chi: T) -> Result<FockVector<T>> {
    spec.check()?;
    let (n, m, k) = (spec.n, spec.m, spec.k);
    let half = T::lit(0.5);
    let nf = T::from_u32(n).unwrap();
    let mf = T::from_u32(m).unwrap();
    let kf = T::from_u32(k).unwrap();
    let mut v = FockVector::zero(4, n);
    v.add_term(&[n - m, m, 0, 0], phase(mf * phi) * half)?;
    v.add_term(&[m, n - m, 0, 0], phase((nf - mf) * phi + spec.zeta) * half)?;
    v.add_term(&[0, 0, n - k, k], phase(kf * chi) * half)?;
    v.add_term(&[0, 0, k, n - k], phase((nf - kf) * chi + spec.zeta_bar) * half)?;
    normalize_built(v)
}

/// `Σ α_m |ψ_Nm⟩` as a two-mode ket.
pub fn fixed_n_ket<T: Real>(state: &SuperpositionFixedN<T>, phi: T) -> Result<FockVector<T>> {
    state.check()?;
    let mut acc = FockVector::zero(2, state.n);
    for (i, t) in state.terms.iter().enumerate() {
        acc = acc.plus(&proto_ket_1d(&state.proto(i), phi)?.scaled(t.amplitude))?;
    }
    Ok(acc)
}

/// `Σ α_n |ψ_nm⟩` as a two-mode ket with cutoff equal to the largest `n`.
pub fn fixed_m_ket<T: Real>(state: &SuperpositionFixedM<T>, phi: T) -> Result<FockVector<T>> {
    state.check()?;
    let cutoff = state.max_photons();
    let mut acc = FockVector::zero(2, cutoff);
    for (i, t) in state.terms.iter().enumerate() {
        let branch = proto_ket_1d_with_cutoff(&state.proto(i), phi, cutoff)?;
        acc = acc.plus(&branch.scaled(t.amplitude))?;
    }
    Ok(acc)
}

/// `Σ α_mk |ψ^k_Nm⟩` as a four-mode ket (not renormalized).
pub fn superposition_2d_ket<T: Real>(state: &Superposition2D<T>, phi: T, chi: T) -> Result<FockVector<T>> {
    state.check()?;
    let mut acc = FockVector::zero(4, state.n);
    for (i, t) in state.terms.iter().enumerate() {
        acc = acc.plus(&proto_ket_2d(&state.proto(i), phi, chi)?.scaled(t.amplitude))?;
    }
    Ok(acc)
}

/// Modes `a, b` of the 1D setup.
pub const MODES_1D: [usize; 2] = [0, 1];
/// Modes `a, b, c, d` of the 2D setup.
pub const MODES_2D: [usize; 4] = [0, 1, 2, 3];
