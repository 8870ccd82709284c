//! Closed-form deposition rates.
//!
//! Rates use the exact convention `Δ = ⟨(ê†)^N ê^N⟩ / N!` with
//! `ê = (â + b̂)/√2` in 1D and `ê = (â + b̂ + ĉ + d̂)/2` in 2D, so every
//! function here agrees with [`crate::fock`] to rounding, not merely up to
//! scale.
//!
//! All proto-states are eigenvectors of photon number, and `ê^N` maps each
//! `N`-photon branch to a multiple of the vacuum. Writing that multiple as a
//! branch *field* `√(N!) · g`, every rate is `|Σ α g|²` and every matrix
//! element is `conj(g) g'`. The 1D field of `|ψ_Nm⟩` is
//!
//! ```text
//! g_m = √C(N,m) (e^{imφ} + e^{i(N-m)φ} e^{iθ_m}) / (2^{(N+1)/2} ν_m)
//! ```
//!
//! where `ν_m = 1` except for the degenerate `N = 2m` branch, whose summed
//! amplitude is renormalized by `ν_m = √(1 + cos θ_m)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Real};
use crate::states::{
    derived_cross_weights, pair_weight, ProtoState1D, ProtoState2D, Superposition2D, SuperpositionFixedM,
    SuperpositionFixedN, Validate, NULL_BRANCH_WEIGHT,
};

/// One evaluated rate; `chi` is present for 2D patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample<T> {
    pub phi: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<T>,
    pub value: T,
}

fn pow2<T: Real>(n: u32) -> T {
    T::lit(2.0).powi(n as i32)
}

fn cis<T: Real>(angle: T) -> Complex<T> {
    Complex::from_polar(T::one(), angle)
}

fn check_index(n: u32, idx: u32, name: &str) -> Result<()> {
    if n < 1 {
        return Err(Error::usage("photon number must be at least 1"));
    }
    if idx > n / 2 {
        return Err(Error::usage(format!("{name} = {idx} exceeds ⌊N/2⌋ = {}", n / 2)));
    }
    Ok(())
}

fn branch_weight<T: Real>(n: u32, m: u32, theta: T) -> Result<T> {
    let w = pair_weight(n, m, theta);
    if w.to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
        return Err(Error::usage(format!("degenerate branch N = {n}, m = {m} cancels at θ = π")));
    }
    Ok(w)
}

/// `e^{imφ} + e^{i(N-m)φ} e^{iθ}`: the two-branch phase bracket.
fn pair_phasor<T: Real>(n: u32, m: u32, theta: T, phi: T) -> Complex<T> {
    let nf = T::from_u32(n).unwrap();
    let mf = T::from_u32(m).unwrap();
    cis(mf * phi) + cis((nf - mf) * phi + theta)
}

/// Field of `|ψ_Nm⟩` with the `2^{N/2}` prefactor left out.
fn field_1d<T: Real>(n: u32, m: u32, theta: T, phi: T) -> Result<Complex<T>> {
    let w = branch_weight(n, m, theta)?;
    let scale = (binomial::<T>(n, m) / (T::lit(2.0) * w)).sqrt();
    Ok(pair_phasor(n, m, theta, phi) * scale)
}

/// Deposition rate of the N00N state: `(1 + cos Nφ) / 2^N`.
pub fn noon_rate<T: Real>(n: u32, phi: T) -> Result<T> {
    if n < 1 {
        return Err(Error::usage("photon number must be at least 1"));
    }
    Ok((T::one() + (T::from_u32(n).unwrap() * phi).cos()) / pow2(n))
}

/// `⟨ψ_Nm| δ̂_N |ψ_Nm'⟩`.
///
/// Non-degenerate indices give
/// `√(C(N,m) C(N,m')) / 2^{N+1} · [e^{i(m'-m)φ} + e^{i(N-m-m')φ}e^{iθ_m'}
///  + e^{-i(N-m-m')φ}e^{-iθ_m} + e^{-i(m'-m)φ}e^{i(θ_m'-θ_m)}]`.
pub fn matrix_element_1d<T: Real>(
    n: u32,
    m: u32,
    mp: u32,
    theta_m: T,
    theta_mp: T,
    phi: T,
) -> Result<Complex<T>> {
    check_index(n, m, "m")?;
    check_index(n, mp, "m'")?;
    let nf = T::from_u32(n).unwrap();
    let mf = T::from_u32(m).unwrap();
    let mpf = T::from_u32(mp).unwrap();
    let bracket = cis((mpf - mf) * phi)
        + cis((nf - mf - mpf) * phi + theta_mp)
        + cis(-(nf - mf - mpf) * phi - theta_m)
        + cis(-(mpf - mf) * phi + theta_mp - theta_m);
    let norm = (branch_weight(n, m, theta_m)? * branch_weight(n, mp, theta_mp)?).sqrt();
    let pref = (binomial::<T>(n, m) * binomial::<T>(n, mp)).sqrt() / (pow2::<T>(n + 1) * norm);
    Ok(bracket * pref)
}

/// `C(N,m) (1 + cos[(N-2m)φ + θ_m]) / 2^N`; for `N = 2m` this is the
/// constant `C(N,m)/2^N` of the renormalized single ket.
pub fn diagonal_rate_1d<T: Real>(n: u32, m: u32, theta: T, phi: T) -> Result<T> {
    check_index(n, m, "m")?;
    let w = branch_weight(n, m, theta)?;
    let arg = T::from_u32(n - 2 * m).unwrap() * phi + theta;
    Ok(binomial::<T>(n, m) * (T::one() + arg.cos()) / (pow2::<T>(n) * w))
}

/// Per-order contributions `|α_n|² Δ_nm(φ)` of a fixed-m superposition.
///
/// Branches with different photon numbers never interfere, so each order
/// only sees its own branch.
pub fn fixed_m_rate_by_order<T: Real>(state: &SuperpositionFixedM<T>, phi: T) -> Result<Vec<(u32, T)>> {
    state.check()?;
    state
        .terms
        .iter()
        .map(|t| Ok((t.n, t.amplitude.norm_sqr() * diagonal_rate_1d(t.n, state.m, t.theta, phi)?)))
        .collect()
}

/// Total rate of a fixed-m superposition on a substrate responding to
/// every order present.
pub fn fixed_m_superposition_rate<T: Real>(state: &SuperpositionFixedM<T>, phi: T) -> Result<T> {
    Ok(fixed_m_rate_by_order(state, phi)?
        .into_iter()
        .fold(T::zero(), |s, (_, v)| s + v))
}

/// Rate of a fixed-N superposition, `|Σ_m α_m g_m|²`.
pub fn fixed_n_superposition_rate<T: Real>(state: &SuperpositionFixedN<T>, phi: T) -> Result<T> {
    state.check()?;
    let mut field: Complex<T> = Complex::default();
    for t in &state.terms {
        field += t.amplitude * field_1d(state.n, t.m, t.theta, phi)?;
    }
    Ok(field.norm_sqr() / pow2(state.n))
}

/// `Σ_{m,m'} α_m* α_m' ⟨ψ_Nm|δ̂_N|ψ_Nm'⟩`. Real up to rounding.
pub fn fixed_n_rate_bilinear<T: Real>(state: &SuperpositionFixedN<T>, phi: T) -> Result<Complex<T>> {
    state.check()?;
    let mut acc = Complex::default();
    for a in &state.terms {
        for b in &state.terms {
            let el = matrix_element_1d(state.n, a.m, b.m, a.theta, b.theta, phi)?;
            acc += a.amplitude.conj() * b.amplitude * el;
        }
    }
    Ok(acc)
}

/// Real double-sum form
/// `(2/2^N) Σ r √(C C') cos(θ'/2 − θ/2 + ξ) cos(½[(N−2m)φ+θ]) cos(½[(N−2m')φ+θ'])`
/// with `r e^{iξ} = α_m* α_m'`.
pub fn fixed_n_rate_cosine_form<T: Real>(state: &SuperpositionFixedN<T>, phi: T) -> Result<T> {
    state.check()?;
    let n = state.n;
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for a in &state.terms {
        for b in &state.terms {
            let (r, xi) = derived_cross_weights(a.amplitude, b.amplitude);
            let ca = binomial::<T>(n, a.m);
            let cb = binomial::<T>(n, b.m);
            let arg_a = T::from_u32(n - 2 * a.m).unwrap() * phi + a.theta;
            let arg_b = T::from_u32(n - 2 * b.m).unwrap() * phi + b.theta;
            let norm = (branch_weight(n, a.m, a.theta)? * branch_weight(n, b.m, b.theta)?).sqrt();
            acc += r * (ca * cb).sqrt() * (half * (b.theta - a.theta) + xi).cos()
                * (half * arg_a).cos()
                * (half * arg_b).cos()
                / norm;
        }
    }
    Ok(T::lit(2.0) * acc / pow2(n))
}

/// Two-branch rate written as two diagonal terms plus one interference term.
///
/// With both diagonal terms in the `C (1 + cos)` form, the interference
/// coefficient that falls out of the bilinear expansion is 4.
pub fn two_term_rate<T: Real>(
    n: u32,
    first: (u32, T, Complex<T>),
    second: (u32, T, Complex<T>),
    phi: T,
) -> Result<T> {
    let (m, tm, am) = first;
    let (mp, tmp, amp) = second;
    check_index(n, m, "m")?;
    check_index(n, mp, "m'")?;
    if m == mp {
        return Err(Error::usage("the two branches must have different m"));
    }
    let half = T::lit(0.5);
    let wm = branch_weight(n, m, tm)?;
    let wmp = branch_weight(n, mp, tmp)?;
    let (cm, cmp) = (binomial::<T>(n, m), binomial::<T>(n, mp));
    let arg_m = T::from_u32(n - 2 * m).unwrap() * phi + tm;
    let arg_mp = T::from_u32(n - 2 * mp).unwrap() * phi + tmp;
    let (r, xi) = derived_cross_weights(am, amp);
    let diag = am.norm_sqr() * cm * (T::one() + arg_m.cos()) / wm + amp.norm_sqr() * cmp * (T::one() + arg_mp.cos()) / wmp;
    let cross = T::lit(4.0) * r * (cm * cmp).sqrt() * (half * tmp - half * tm + xi).cos() * (half * arg_m).cos()
        * (half * arg_mp).cos()
        / (wm * wmp).sqrt();
    Ok((diag + cross) / pow2(n))
}

/// Field of `|ψ^k_Nm⟩` with the `2^N` prefactor left out:
/// `½[√C(N,m) u_m(φ) + √C(N,k) v_k(χ)] / s`, split into its x and y parts.
fn field_2d_parts<T: Real>(p: &ProtoState2D<T>, phi: T, chi: T) -> Result<(Complex<T>, Complex<T>)> {
    check_index(p.n, p.m, "m")?;
    check_index(p.n, p.k, "k")?;
    let norm_sqr = p.raw_norm_sqr();
    if norm_sqr.to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
        return Err(Error::usage("all branches of the 2D state cancel"));
    }
    let scale = T::lit(0.5) / norm_sqr.sqrt();
    let x = pair_phasor(p.n, p.m, p.zeta, phi) * (binomial::<T>(p.n, p.m).sqrt() * scale);
    let y = pair_phasor(p.n, p.k, p.zeta_bar, chi) * (binomial::<T>(p.n, p.k).sqrt() * scale);
    Ok((x, y))
}

/// The four mode-pair blocks of a 2D matrix element: `xx` pairs the `a, b`
/// branches of bra and ket, `xy` the bra's `a, b` with the ket's `c, d`, etc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocks2D<T> {
    pub xx: Complex<T>,
    pub xy: Complex<T>,
    pub yx: Complex<T>,
    pub yy: Complex<T>,
}

impl<T: Real> Blocks2D<T> {
    pub fn total(&self) -> Complex<T> {
        self.xx + self.xy + self.yx + self.yy
    }
}

pub fn matrix_element_2d_blocks<T: Real>(
    bra: &ProtoState2D<T>,
    ket: &ProtoState2D<T>,
    phi: T,
    chi: T,
) -> Result<Blocks2D<T>> {
    if bra.n != ket.n {
        return Err(Error::usage("bra and ket must have the same photon number"));
    }
    let (bx, by) = field_2d_parts(bra, phi, chi)?;
    let (kx, ky) = field_2d_parts(ket, phi, chi)?;
    let p = pow2::<T>(2 * bra.n);
    Ok(Blocks2D {
        xx: bx.conj() * kx / p,
        xy: bx.conj() * ky / p,
        yx: by.conj() * kx / p,
        yy: by.conj() * ky / p,
    })
}

/// `⟨ψ^k_Nm| δ̂_N |ψ^{k'}_Nm'⟩`.
///
/// Each block carries `√(C C')` binomial factors, as the ladder algebra
/// requires.
pub fn matrix_element_2d<T: Real>(bra: &ProtoState2D<T>, ket: &ProtoState2D<T>, phi: T, chi: T) -> Result<Complex<T>> {
    Ok(matrix_element_2d_blocks(bra, ket, phi, chi)?.total())
}

/// Diagonal 2D rate in its three-term form:
/// `[C_m(1+cos A) + C_k(1+cos B) + 4√(C_m C_k) cos(½[N(φ−χ) + ζ_m − ζ̄_k]) cos(A/2) cos(B/2)] / (2 s² 4^N)`
/// with `A = (N−2m)φ + ζ_m`, `B = (N−2k)χ + ζ̄_k`, and `s²` the ket's raw norm.
pub fn diagonal_rate_2d<T: Real>(p: &ProtoState2D<T>, phi: T, chi: T) -> Result<T> {
    check_index(p.n, p.m, "m")?;
    check_index(p.n, p.k, "k")?;
    let s2 = p.raw_norm_sqr();
    if s2.to_f64().unwrap() <= NULL_BRANCH_WEIGHT {
        return Err(Error::usage("all branches of the 2D state cancel"));
    }
    let half = T::lit(0.5);
    let nf = T::from_u32(p.n).unwrap();
    let cm = binomial::<T>(p.n, p.m);
    let ck = binomial::<T>(p.n, p.k);
    let a = T::from_u32(p.n - 2 * p.m).unwrap() * phi + p.zeta;
    let b = T::from_u32(p.n - 2 * p.k).unwrap() * chi + p.zeta_bar;
    let cross_phase = half * (nf * (phi - chi) + p.zeta - p.zeta_bar);
    let body = cm * (T::one() + a.cos())
        + ck * (T::one() + b.cos())
        + T::lit(4.0) * (cm * ck).sqrt() * cross_phase.cos() * (half * a).cos() * (half * b).cos();
    Ok(body / (T::lit(2.0) * s2 * pow2::<T>(2 * p.n)))
}

/// Rate of a 2D superposition, `|Σ α_mk G_mk|²`.
pub fn superposition_2d_rate<T: Real>(state: &Superposition2D<T>, phi: T, chi: T) -> Result<T> {
    state.check()?;
    let mut field: Complex<T> = Complex::default();
    for (i, t) in state.terms.iter().enumerate() {
        let (x, y) = field_2d_parts(&state.proto(i), phi, chi)?;
        field += t.amplitude * (x + y);
    }
    Ok(field.norm_sqr() / pow2(2 * state.n))
}

/// `Σ α*_mk α_m'k' Δ^{Nm'k'}_{Nmk}`. Real up to rounding.
pub fn superposition_2d_rate_bilinear<T: Real>(state: &Superposition2D<T>, phi: T, chi: T) -> Result<Complex<T>> {
    state.check()?;
    let mut acc = Complex::default();
    for (i, a) in state.terms.iter().enumerate() {
        for (j, b) in state.terms.iter().enumerate() {
            let el = matrix_element_2d(&state.proto(i), &state.proto(j), phi, chi)?;
            acc += a.amplitude.conj() * b.amplitude * el;
        }
    }
    Ok(acc)
}

/// Precomputed per-branch 1D fields on a fixed set of phases, for repeated
/// evaluation with varying amplitudes (the optimizer's inner loop).
#[derive(Debug, Clone)]
pub struct FieldTable1D<T> {
    n: u32,
    branches: usize,
    /// `fields[j * branches + i]`: branch `i` at sample `j`.
    fields: Vec<Complex<T>>,
}

impl<T: Real> FieldTable1D<T> {
    /// Branch `i` is `|ψ_{N,m_i}⟩` with phase `θ_i`.
    pub fn new(n: u32, branches: &[ProtoState1D<T>], phis: &[T]) -> Result<Self> {
        for b in branches {
            if b.n != n {
                return Err(Error::usage("all branches must share the photon number"));
            }
            b.check()?;
        }
        let scale = pow2::<T>(n).sqrt().recip();
        let mut fields = Vec::with_capacity(branches.len() * phis.len());
        for &phi in phis {
            for b in branches {
                fields.push(field_1d(n, b.m, b.theta, phi)? * scale);
            }
        }
        Ok(Self {
            n,
            branches: branches.len(),
            fields,
        })
    }

    pub fn photons(&self) -> u32 {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.fields.len() / self.branches.max(1)
    }

    /// Rate at sample `j` for amplitudes `alpha` (one per branch, unit norm).
    #[inline]
    pub fn rate(&self, alpha: &[Complex<T>], j: usize) -> T {
        let row = &self.fields[j * self.branches..(j + 1) * self.branches];
        row.iter()
            .zip(alpha)
            .fold(Complex::default(), |s: Complex<T>, (g, a)| s + *a * *g)
            .norm_sqr()
    }
}

/// Separable 2D field tables: the field of a 2D superposition at `(φ_i, χ_j)`
/// is `X(φ_i) + Y(χ_j)`, where `X` and `Y` depend on the amplitudes only
/// through their per-`m` and per-`k` sums.
#[derive(Debug, Clone)]
pub struct FieldTable2D<T> {
    n: u32,
    side: usize,
    /// `x[i * side + m]`: `√C(N,m) u_m(φ_i) / 2^N`.
    x: Vec<Complex<T>>,
    /// `y[j * side + k]`: `√C(N,k) v_k(χ_j) / 2^N`.
    y: Vec<Complex<T>>,
    /// Inverse raw norm per `(m, k)` grid cell, row-major.
    inv_norm: Vec<T>,
    phis: usize,
    chis: usize,
}

impl<T: Real> FieldTable2D<T> {
    /// All `(⌊N/2⌋+1)²` branches share phases `zeta[m]` and `zeta_bar[k]`.
    pub fn new(n: u32, zeta: &[T], zeta_bar: &[T], phis: &[T], chis: &[T]) -> Result<Self> {
        let side = (n / 2 + 1) as usize;
        if zeta.len() != side || zeta_bar.len() != side {
            return Err(Error::usage(format!("expected {side} phases per axis")));
        }
        let scale = pow2::<T>(n).recip();
        let mut inv_norm = Vec::with_capacity(side * side);
        for (m, &z) in zeta.iter().enumerate() {
            for (k, &zb) in zeta_bar.iter().enumerate() {
                let p = ProtoState2D {
                    n,
                    m: m as u32,
                    k: k as u32,
                    zeta: z,
                    zeta_bar: zb,
                };
                p.check()?;
                inv_norm.push(p.raw_norm_sqr().sqrt().recip());
            }
        }
        let axis = |angles: &[T], phases: &[T]| {
            let mut out = Vec::with_capacity(angles.len() * side);
            for &a in angles {
                for (m, &ph) in phases.iter().enumerate() {
                    let c = binomial::<T>(n, m as u32).sqrt() * scale * T::lit(0.5);
                    out.push(pair_phasor(n, m as u32, ph, a) * c);
                }
            }
            out
        };
        Ok(Self {
            n,
            side,
            x: axis(phis, zeta),
            y: axis(chis, zeta_bar),
            inv_norm,
            phis: phis.len(),
            chis: chis.len(),
        })
    }

    pub fn photons(&self) -> u32 {
        self.n
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.phis, self.chis)
    }

    /// Per-axis amplitude sums `(A_m, B_k)` for a row-major `α_mk` block.
    pub fn axis_weights(&self, alpha: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let s = self.side;
        let mut a = vec![Complex::default(); s];
        let mut b = vec![Complex::default(); s];
        for m in 0..s {
            for k in 0..s {
                let w = alpha[m * s + k] * self.inv_norm[m * s + k];
                a[m] += w;
                b[k] += w;
            }
        }
        (a, b)
    }

    /// `X(φ_i)` for the given axis weights.
    pub fn x_field(&self, a: &[Complex<T>], i: usize) -> Complex<T> {
        let row = &self.x[i * self.side..(i + 1) * self.side];
        row.iter().zip(a).fold(Complex::default(), |s: Complex<T>, (u, w)| s + *u * *w)
    }

    pub fn y_field(&self, b: &[Complex<T>], j: usize) -> Complex<T> {
        let row = &self.y[j * self.side..(j + 1) * self.side];
        row.iter().zip(b).fold(Complex::default(), |s: Complex<T>, (v, w)| s + *v * *w)
    }
}
