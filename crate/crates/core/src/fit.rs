//! Superposition-method fits: a seeded global search over amplitudes and
//! exposure time minimizing `d_N`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{minimize, AmplitudeCodec, FitResult, OptimizerConfig, StrategyKind};
use crate::states::{Superposition2D, SuperpositionFixedN};
use crate::synth::quadrature::{DEFAULT_POINTS_1D, DEFAULT_POINTS_2D};
use crate::synth::{Objective1D, Objective2D, PeriodicGrid, ProductGrid, TargetPattern1D, TargetPattern2D};

/// Search settings. Unset fields fall back to the optimizer defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub seed: u64,
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub mutation_factor: Option<f64>,
    pub crossover_rate: Option<f64>,
    pub strategy: StrategyKind,
    pub threads: Option<usize>,
    /// Samples per axis.
    pub grid_points: Option<usize>,
    /// Box for each real amplitude component.
    pub amplitude_bound: f64,
    /// Box for `ln t`; defaults to `[-10, 10 + N ln 4]`.
    pub log_t_bounds: Option<(f64, f64)>,
    /// Branch phases `θ_m` (1D) or `ζ_m = ζ̄_m` per axis (2D); zero when unset.
    pub phases: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            population_size: None,
            generations: None,
            mutation_factor: None,
            crossover_rate: None,
            strategy: StrategyKind::default(),
            threads: None,
            grid_points: None,
            amplitude_bound: 1.0,
            log_t_bounds: None,
            phases: None,
        }
    }
}

impl FitOptions {
    fn config(&self, n: u32, codec: &AmplitudeCodec) -> Result<OptimizerConfig> {
        if !(self.amplitude_bound > 0.0) || !self.amplitude_bound.is_finite() {
            return Err(Error::usage("amplitude_bound must be positive"));
        }
        let log_t = self
            .log_t_bounds
            .unwrap_or((-10.0, 10.0 + f64::from(n) * 4f64.ln()));
        let mut cfg = OptimizerConfig::new(codec.bounds(self.amplitude_bound, log_t), self.seed);
        if let Some(p) = self.population_size {
            cfg.population_size = p;
        }
        if let Some(g) = self.generations {
            cfg.generations = g;
        }
        if let Some(f) = self.mutation_factor {
            cfg.mutation_factor = f;
        }
        if let Some(c) = self.crossover_rate {
            cfg.crossover_rate = c;
        }
        cfg.strategy = self.strategy;
        cfg.threads = self.threads;
        cfg.validate()?;
        Ok(cfg)
    }

    fn phases(&self, n: u32) -> Result<Vec<f64>> {
        let side = (n / 2 + 1) as usize;
        match &self.phases {
            None => Ok(vec![0.0; side]),
            Some(p) if p.len() == side => Ok(p.clone()),
            Some(p) => Err(Error::usage(format!("expected {side} phases for N = {n}, got {}", p.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit1D {
    pub state: SuperpositionFixedN<f64>,
    pub exposure_time: f64,
    /// `d_N` of the best candidate on the fitting grid.
    pub distance: f64,
    pub config: OptimizerConfig,
    pub result: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit2D {
    pub state: Superposition2D<f64>,
    pub exposure_time: f64,
    pub distance: f64,
    pub config: OptimizerConfig,
    pub result: FitResult,
}

/// Penalty returned for parameter vectors that cannot be decoded.
fn decode_or_inf(codec: &AmplitudeCodec, x: &[f64], eval: impl Fn(&[Complex<f64>], f64) -> f64) -> f64 {
    match codec.decode(x) {
        Ok((alpha, t)) => eval(&alpha, t),
        Err(_) => f64::NAN,
    }
}

pub fn fit_superposition_1d(n: u32, target: &dyn TargetPattern1D<f64>, options: &FitOptions) -> Result<Fit1D> {
    let grid = PeriodicGrid::new(options.grid_points.unwrap_or(DEFAULT_POINTS_1D))?;
    let objective = Objective1D::with_phases(n, &options.phases(n)?, target, &grid)?;
    let codec = AmplitudeCodec::fixed_n(n);
    let config = options.config(n, &codec)?;
    let result = minimize(|x| decode_or_inf(&codec, x, |a, t| objective.evaluate(a, t)), &config)?;
    let (alpha, exposure_time) = codec.decode(&result.best_params)?;
    Ok(Fit1D {
        state: objective.state(&alpha)?,
        exposure_time,
        distance: result.best_objective,
        config,
        result,
    })
}

pub fn fit_superposition_2d(n: u32, target: &dyn TargetPattern2D<f64>, options: &FitOptions) -> Result<Fit2D> {
    let grid = ProductGrid::square(options.grid_points.unwrap_or(DEFAULT_POINTS_2D))?;
    let phases = options.phases(n)?;
    let objective = Objective2D::new(n, &phases, &phases, target, &grid)?;
    let codec = AmplitudeCodec::two_d(n);
    let config = options.config(n, &codec)?;
    let result = minimize(|x| decode_or_inf(&codec, x, |a, t| objective.evaluate(a, t)), &config)?;
    let (alpha, exposure_time) = codec.decode(&result.best_params)?;
    Ok(Fit2D {
        state: objective.state(&alpha)?,
        exposure_time,
        distance: result.best_objective,
        config,
        result,
    })
}
