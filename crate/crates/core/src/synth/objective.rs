//! Least-squares objectives `∫|F − Δ t|²` for the superposition method.

use num_complex::Complex;

use crate::deposition::{fixed_n_superposition_rate, superposition_2d_rate, FieldTable1D, FieldTable2D};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::states::{ProtoState1D, Superposition2D, SuperpositionFixedN, Validate};

use super::quadrature::{PeriodicGrid, ProductGrid};
use super::target::{TargetPattern1D, TargetPattern2D};

fn check_resolution(points: usize, n: u32) -> Result<()> {
    let need = 4 * n as usize + 1;
    if points < need {
        return Err(Error::usage(format!("grid has {points} points, need at least {need} for N = {n}")));
    }
    Ok(())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::usage(format!("exposure time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `d_N` for one state, evaluated through the closed-form rate.
pub fn objective_1d<T: Real>(
    state: &SuperpositionFixedN<T>,
    t: T,
    target: &dyn TargetPattern1D<T>,
    grid: &PeriodicGrid<T>,
) -> Result<T> {
    state.check()?;
    check_time(t)?;
    check_resolution(grid.points(), state.n)?;
    let err = std::cell::RefCell::new(None);
    let value = grid.integrate_target(target, |phi, f| match fixed_n_superposition_rate(state, phi) {
        Ok(d) => (f - d * t) * (f - d * t),
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            T::zero()
        }
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => value,
    }
}

/// Double-integral objective for a 2D superposition. Targets are sampled at
/// the grid nodes.
pub fn objective_2d<T: Real>(
    state: &Superposition2D<T>,
    t: T,
    target: &dyn TargetPattern2D<T>,
    grid: &ProductGrid<T>,
) -> Result<T> {
    state.check()?;
    check_time(t)?;
    check_resolution(grid.phi.points().min(grid.chi.points()), state.n)?;
    let samples = grid.sample(target)?;
    let cols = grid.chi.points();
    let mut sum = T::zero();
    for i in 0..grid.phi.points() {
        for j in 0..cols {
            let d = superposition_2d_rate(state, grid.phi.node(i), grid.chi.node(j))?;
            let r = samples[i * cols + j] - d * t;
            sum += r * r;
        }
    }
    Ok(sum * grid.weight())
}

/// Precomputed 1D objective over a fixed set of branches, for the optimizer.
#[derive(Debug, Clone)]
pub struct Objective1D<T> {
    table: FieldTable1D<T>,
    branches: Vec<ProtoState1D<T>>,
    phis: Vec<T>,
    left: Vec<T>,
    right: Vec<T>,
    weight: T,
}

impl<T: Real> Objective1D<T> {
    pub fn new(
        n: u32,
        branches: Vec<ProtoState1D<T>>,
        target: &dyn TargetPattern1D<T>,
        grid: &PeriodicGrid<T>,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::usage("objective needs at least one branch"));
        }
        check_resolution(grid.points(), n)?;
        let phis = grid.nodes();
        let table = FieldTable1D::new(n, &branches, &phis)?;
        let mut left = Vec::with_capacity(phis.len());
        let mut right = Vec::with_capacity(phis.len());
        for &phi in &phis {
            let (l, r) = target.limits(phi);
            if !l.is_finite() || !r.is_finite() {
                return Err(Error::numeric(format!("target is not finite at φ = {phi}")));
            }
            left.push(l);
            right.push(r);
        }
        Ok(Self {
            table,
            branches,
            phis,
            left,
            right,
            weight: grid.weight(),
        })
    }

    /// Every `m = 0..=⌊N/2⌋` with the given phases.
    pub fn with_phases(n: u32, thetas: &[T], target: &dyn TargetPattern1D<T>, grid: &PeriodicGrid<T>) -> Result<Self> {
        if thetas.len() != (n / 2 + 1) as usize {
            return Err(Error::usage(format!("expected {} phases for N = {n}", n / 2 + 1)));
        }
        let branches = thetas
            .iter()
            .enumerate()
            .map(|(m, &th)| ProtoState1D::new(n, m as u32, th))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, branches, target, grid)
    }

    pub fn photons(&self) -> u32 {
        self.table.photons()
    }

    pub fn branches(&self) -> &[ProtoState1D<T>] {
        &self.branches
    }

    pub fn phis(&self) -> &[T] {
        &self.phis
    }

    /// `d_N` for unit-norm amplitudes `alpha` (one per branch).
    pub fn evaluate(&self, alpha: &[Complex<T>], t: T) -> T {
        let half = T::lit(0.5);
        let mut sum = T::zero();
        for j in 0..self.phis.len() {
            let p = self.table.rate(alpha, j) * t;
            let (l, r) = (self.left[j] - p, self.right[j] - p);
            sum += if self.left[j] == self.right[j] { l * l } else { half * (l * l + r * r) };
        }
        sum * self.weight
    }

    pub fn rates(&self, alpha: &[Complex<T>]) -> Vec<T> {
        (0..self.phis.len()).map(|j| self.table.rate(alpha, j)).collect()
    }

    pub fn state(&self, alpha: &[Complex<T>]) -> Result<SuperpositionFixedN<T>> {
        if alpha.len() != self.branches.len() {
            return Err(Error::usage("amplitude count differs from branch count"));
        }
        SuperpositionFixedN::normalized(
            self.photons(),
            self.branches
                .iter()
                .zip(alpha)
                .map(|(b, &a)| crate::states::Term1D { m: b.m, theta: b.theta, amplitude: a })
                .collect(),
        )
    }
}

/// Precomputed 2D objective over the full `(⌊N/2⌋+1)²` block of branches
/// with per-axis phases.
#[derive(Debug, Clone)]
pub struct Objective2D<T> {
    table: FieldTable2D<T>,
    zeta: Vec<T>,
    zeta_bar: Vec<T>,
    target: Vec<T>,
    weight: T,
}

impl<T: Real> Objective2D<T> {
    pub fn new(
        n: u32,
        zeta: &[T],
        zeta_bar: &[T],
        target: &dyn TargetPattern2D<T>,
        grid: &ProductGrid<T>,
    ) -> Result<Self> {
        check_resolution(grid.phi.points().min(grid.chi.points()), n)?;
        let table = FieldTable2D::new(n, zeta, zeta_bar, &grid.phi.nodes(), &grid.chi.nodes())?;
        Ok(Self {
            table,
            zeta: zeta.to_vec(),
            zeta_bar: zeta_bar.to_vec(),
            target: grid.sample(target)?,
            weight: grid.weight(),
        })
    }

    pub fn photons(&self) -> u32 {
        self.table.photons()
    }

    /// Branches per axis, `⌊N/2⌋ + 1`.
    pub fn side(&self) -> usize {
        self.table.side()
    }

    /// Rates on the grid, row-major in `(φ, χ)`, for a row-major `α_mk` block.
    pub fn rates(&self, alpha: &[Complex<T>]) -> Vec<T> {
        let (a, b) = self.table.axis_weights(alpha);
        let (np, nc) = self.table.shape();
        let y: Vec<_> = (0..nc).map(|j| self.table.y_field(&b, j)).collect();
        let mut out = Vec::with_capacity(np * nc);
        for i in 0..np {
            let x = self.table.x_field(&a, i);
            out.extend(y.iter().map(|&yj| (x + yj).norm_sqr()));
        }
        out
    }

    pub fn evaluate(&self, alpha: &[Complex<T>], t: T) -> T {
        let (a, b) = self.table.axis_weights(alpha);
        let (np, nc) = self.table.shape();
        let y: Vec<_> = (0..nc).map(|j| self.table.y_field(&b, j)).collect();
        let mut sum = T::zero();
        for i in 0..np {
            let x = self.table.x_field(&a, i);
            let row = &self.target[i * nc..(i + 1) * nc];
            for (f, &yj) in row.iter().zip(&y) {
                let r = *f - (x + yj).norm_sqr() * t;
                sum += r * r;
            }
        }
        sum * self.weight
    }

    pub fn state(&self, alpha: &[Complex<T>]) -> Result<Superposition2D<T>> {
        let s = self.side();
        if alpha.len() != s * s {
            return Err(Error::usage("amplitude count differs from branch count"));
        }
        let mut terms = Vec::with_capacity(s * s);
        for m in 0..s {
            for k in 0..s {
                terms.push(crate::states::Term2D {
                    m: m as u32,
                    k: k as u32,
                    zeta: self.zeta[m],
                    zeta_bar: self.zeta_bar[k],
                    amplitude: alpha[m * s + k],
                });
            }
        }
        Superposition2D::normalized(self.photons(), terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{Term1D, Term2D};
    use crate::synth::target::{FnTarget1D, FnTarget2D, SquareRegion, Trench};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample_state(n: u32) -> SuperpositionFixedN<f64> {
        let terms = (0..=n / 2)
            .map(|m| Term1D { m, theta: 0.3 * f64::from(m), amplitude: c(1.0 + f64::from(m), 0.5 - f64::from(m)) })
            .collect();
        SuperpositionFixedN::normalized(n, terms).unwrap()
    }

    #[test]
    fn exact_target_gives_zero() {
        let s = sample_state(4);
        let grid = PeriodicGrid::new(64).unwrap();
        let s2 = s.clone();
        let f = FnTarget1D::new("rate", move |p: f64| 2.5 * fixed_n_superposition_rate(&s2, p).unwrap());
        assert!(objective_1d(&s, 2.5, &f, &grid).unwrap() < 1e-28);
    }

    #[test]
    fn table_matches_direct() {
        let s = sample_state(6);
        let grid = PeriodicGrid::new(128).unwrap();
        let target = Trench::new(1.0).unwrap();
        let thetas: Vec<_> = s.terms.iter().map(|t| t.theta).collect();
        let obj = Objective1D::with_phases(6, &thetas, &target, &grid).unwrap();
        let alpha: Vec<_> = s.terms.iter().map(|t| t.amplitude).collect();
        for t in [0.5, 3.0, 40.0] {
            let a = obj.evaluate(&alpha, t);
            let b = objective_1d(&s, t, &target, &grid).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn quadratic_in_time() {
        // d(t) = ∫F² − 2t∫FΔ + t²∫Δ², summed by brute force on the same nodes.
        let s = sample_state(4);
        let grid = PeriodicGrid::new(50).unwrap();
        let f = FnTarget1D::new("f", |p: f64| 0.2 + p.sin().powi(2));
        let nodes = grid.nodes();
        let w = grid.weight();
        let (mut ff, mut fd, mut dd) = (0.0, 0.0, 0.0);
        for &p in &nodes {
            let (fv, dv) = (f.value(p), fixed_n_superposition_rate(&s, p).unwrap());
            ff += fv * fv * w;
            fd += fv * dv * w;
            dd += dv * dv * w;
        }
        for t in [1.0, 2.0, 4.0] {
            let want = ff - 2.0 * t * fd + t * t * dd;
            assert!((objective_1d(&s, t, &f, &grid).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_and_validation() {
        let s = sample_state(10);
        let target = Trench::new(1.0).unwrap();
        assert!(objective_1d(&s, 1.0, &target, &PeriodicGrid::new(40).unwrap()).is_err());
        assert!(objective_1d(&s, 1.0, &target, &PeriodicGrid::new(41).unwrap()).is_ok());
        let mut bad = s.clone();
        bad.terms[0].amplitude = c(5.0, 0.0);
        assert!(objective_1d(&bad, 1.0, &target, &PeriodicGrid::new(64).unwrap()).is_err());
    }

    #[test]
    fn table_2d_matches_direct() {
        let n = 4;
        let zeta = [0.0, 0.4, 1.0];
        let zbar = [0.2, 0.0, 2.0];
        let grid = ProductGrid::square(24).unwrap();
        let target = SquareRegion::new(1.0, PI / 2.0).unwrap();
        let obj = Objective2D::new(n, &zeta, &zbar, &target, &grid).unwrap();
        let alpha: Vec<_> = (0..9).map(|i| c(0.1 * f64::from(i) - 0.3, 0.2)).collect();
        let state = obj.state(&alpha).unwrap();
        let unit: Vec<_> = state.terms.iter().map(|t| t.amplitude).collect();
        let a = obj.evaluate(&unit, 7.0);
        let b = objective_2d(&state, 7.0, &target, &grid).unwrap();
        assert!((a - b).abs() < 1e-12 * b, "{a} {b}");
    }

    #[test]
    fn zero_target_zero_amplitudes() {
        let grid = ProductGrid::square(16).unwrap();
        let zero = FnTarget2D::new("zero", |_: f64, _: f64| 0.0);
        let obj = Objective2D::new(2, &[0.0, 0.0], &[0.0, 0.0], &zero, &grid).unwrap();
        assert_eq!(obj.evaluate(&[c(0.0, 0.0); 4], 1.0), 0.0);
    }

    #[test]
    fn symmetric_target_transposition() {
        let n = 4;
        let grid = ProductGrid::square(20).unwrap();
        let target = FnTarget2D::new("sym", |p: f64, q: f64| (p - q).cos().powi(2) + 0.3 * (p.sin() + q.sin()));
        let zeta = [0.0, 0.5, 1.1];
        let obj = Objective2D::new(n, &zeta, &zeta, &target, &grid).unwrap();
        let alpha: Vec<_> = (0..9).map(|i| c((0.7 * f64::from(i)).sin(), (1.3 * f64::from(i)).cos())).collect();
        let transposed: Vec<_> = (0..9).map(|i| alpha[(i % 3) * 3 + i / 3]).collect();
        let (a, b) = (obj.evaluate(&alpha, 3.0), obj.evaluate(&transposed, 3.0));
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn transposition_through_states() {
        let grid = ProductGrid::square(17).unwrap();
        let target = SquareRegion::new(1.0, 1.0).unwrap();
        let mk = |swap: bool| {
            let terms = vec![
                Term2D { m: 0, k: 1, zeta: 0.3, zeta_bar: 0.3, amplitude: c(0.6, 0.0) },
                Term2D { m: 1, k: 0, zeta: 0.3, zeta_bar: 0.3, amplitude: c(0.0, 0.8) },
            ];
            let terms = if swap {
                terms.into_iter().map(|t| Term2D { m: t.k, k: t.m, ..t }).collect()
            } else {
                terms
            };
            Superposition2D::new(2, terms).unwrap()
        };
        let a = objective_2d(&mk(false), 2.0, &target, &grid).unwrap();
        let b = objective_2d(&mk(true), 2.0, &target, &grid).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    proptest! {
        #[test]
        fn global_phase_invariance(phase in 0.0..std::f64::consts::TAU, t in 0.1f64..50.0, seed in 0u32..1000) {
            let n = 6;
            let grid = PeriodicGrid::new(64).unwrap();
            let target = Trench::new(1.0).unwrap();
            let obj = Objective1D::with_phases(n, &[0.0; 4], &target, &grid).unwrap();
            let s = f64::from(seed);
            let raw: Vec<_> = (0..4).map(|i| c((s + f64::from(i)).sin(), (s * 1.7 + f64::from(i)).cos())).collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let alpha: Vec<_> = raw.iter().map(|a| a / norm).collect();
            let rotated: Vec<_> = alpha.iter().map(|a| a * Complex::from_polar(1.0, phase)).collect();
            let (x, y) = (obj.evaluate(&alpha, t), obj.evaluate(&rotated, t));
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }
}
