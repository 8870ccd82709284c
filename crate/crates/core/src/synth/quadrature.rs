//! Composite trapezoid rule on uniform periodic grids.
//!
//! Over a full period the trapezoid rule identifies the endpoints, so each
//! node carries the same weight `2π / M` and trigonometric polynomials of
//! degree below `M` integrate exactly.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::target::{TargetPattern1D, TargetPattern2D};

pub const DEFAULT_POINTS_1D: usize = 1024;
pub const DEFAULT_POINTS_2D: usize = 256;
/// Grid used for Fourier coefficients and truncation distances of targets
/// with jumps, where the rule converges only algebraically.
pub const COEFFICIENT_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid<T> {
    points: usize,
    offset: T,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(points: usize) -> Result<Self> {
        Self::with_offset(points, T::zero())
    }

    /// Nodes at `offset + 2πj/M`.
    pub fn with_offset(points: usize, offset: T) -> Result<Self> {
        if points == 0 {
            return Err(Error::usage("grid needs at least one point"));
        }
        if !offset.is_finite() {
            return Err(Error::usage("grid offset must be finite"));
        }
        Ok(Self { points, offset })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn weight(&self) -> T {
        T::two_pi() / T::from_count(self.points)
    }

    pub fn node(&self, j: usize) -> T {
        self.offset + T::two_pi() * T::from_count(j) / T::from_count(self.points)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// `∫₀^{2π} f`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        let sum = (0..self.points).fold(T::zero(), |s, j| s + f(self.node(j)));
        sum * self.weight()
    }

    /// `∫₀^{2π} g(φ, F(φ))` where `F` may jump at nodes: there `g` is averaged
    /// over the one-sided limits of `F`.
    pub fn integrate_target(&self, target: &dyn TargetPattern1D<T>, g: impl Fn(T, T) -> T) -> Result<T> {
        let half = T::lit(0.5);
        let mut sum = T::zero();
        for j in 0..self.points {
            let phi = self.node(j);
            let (l, r) = target.limits(phi);
            if !l.is_finite() || !r.is_finite() {
                return Err(Error::numeric(format!("target is not finite at φ = {phi}")));
            }
            sum += if l == r { g(phi, l) } else { half * (g(phi, l) + g(phi, r)) };
        }
        let out = sum * self.weight();
        if !out.is_finite() {
            return Err(Error::numeric("quadrature produced a non-finite value"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductGrid<T> {
    pub phi: PeriodicGrid<T>,
    pub chi: PeriodicGrid<T>,
}

impl<T: Real> ProductGrid<T> {
    pub fn square(points: usize) -> Result<Self> {
        Ok(Self {
            phi: PeriodicGrid::new(points)?,
            chi: PeriodicGrid::new(points)?,
        })
    }

    pub fn weight(&self) -> T {
        self.phi.weight() * self.chi.weight()
    }

    pub fn integrate(&self, f: impl Fn(T, T) -> T) -> T {
        let mut sum = T::zero();
        for i in 0..self.phi.points() {
            let phi = self.phi.node(i);
            for j in 0..self.chi.points() {
                sum += f(phi, self.chi.node(j));
            }
        }
        sum * self.weight()
    }

    /// Samples a target on the grid, row-major in `φ`; fails on non-finite values.
    pub fn sample(&self, target: &dyn TargetPattern2D<T>) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.phi.points() * self.chi.points());
        for i in 0..self.phi.points() {
            let phi = self.phi.node(i);
            for j in 0..self.chi.points() {
                let chi = self.chi.node(j);
                let v = target.value(phi, chi);
                if !v.is_finite() {
                    return Err(Error::numeric(format!("target is not finite at ({phi}, {chi})")));
                }
                out.push(v);
            }
        }
        Ok(out)
    }
}
