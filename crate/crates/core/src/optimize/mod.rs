//! Differential evolution with elitist selection.
//!
//! Every trial vector draws its randomness from a generator keyed by
//! `(seed, generation, member)`, and selection happens after a barrier on a
//! snapshot of the population, so results do not depend on how many worker
//! threads evaluate the objective.

mod codec;

pub use codec::AmplitudeCodec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GENERATIONS: usize = 500;
pub const DEFAULT_MUTATION: f64 = 0.7;
pub const DEFAULT_CROSSOVER: f64 = 0.9;
pub const MAX_DEFAULT_POPULATION: usize = 200;
pub const MIN_POPULATION: usize = 4;

/// Population size used when none is given: 15 per parameter, capped.
pub fn default_population(dim: usize) -> usize {
    (15 * dim).clamp(MIN_POPULATION, MAX_DEFAULT_POPULATION)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StrategyKind {
    #[default]
    #[serde(rename = "rand1bin")]
    Rand1Bin,
    #[serde(rename = "best1bin")]
    Best1Bin,
}

impl StrategyKind {
    pub fn strategy(self) -> &'static dyn Strategy {
        match self {
            StrategyKind::Rand1Bin => &Rand1Bin,
            StrategyKind::Best1Bin => &Best1Bin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_factor: f64,
    pub crossover_rate: f64,
    pub seed: u64,
    /// Closed interval per parameter.
    pub bounds: Vec<(f64, f64)>,
    #[serde(default)]
    pub strategy: StrategyKind,
    /// Worker threads; `None` uses the global pool. Does not affect results.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl OptimizerConfig {
    /// Default hyperparameters for the given box.
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        Self {
            population_size: default_population(bounds.len()),
            generations: DEFAULT_GENERATIONS,
            mutation_factor: DEFAULT_MUTATION,
            crossover_rate: DEFAULT_CROSSOVER,
            seed,
            bounds,
            strategy: StrategyKind::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < MIN_POPULATION {
            return Err(Error::usage(format!("population_size must be at least {MIN_POPULATION}")));
        }
        if self.generations < 1 {
            return Err(Error::usage("generations must be at least 1"));
        }
        if !(self.mutation_factor > 0.0 && self.mutation_factor < 2.0) {
            return Err(Error::usage("mutation_factor must lie in (0, 2)"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::usage("crossover_rate must lie in [0, 1]"));
        }
        if self.bounds.is_empty() {
            return Err(Error::usage("at least one parameter is required"));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::usage(format!("bounds[{i}] = ({lo}, {hi}) is not a finite interval")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::usage("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub best_params: Vec<f64>,
    pub best_objective: f64,
    /// Best objective after initialization, then after each generation.
    pub history: Vec<f64>,
    /// Mean finite objective of the population at the same points.
    pub mean_history: Vec<f64>,
    pub evaluations: u64,
    /// Candidates discarded for a non-finite objective.
    pub rejected: u64,
}

/// One row of the optimizer trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trace {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

impl FitResult {
    pub fn trace(&self) -> Vec<Trace> {
        self.history
            .iter()
            .zip(&self.mean_history)
            .enumerate()
            .map(|(generation, (&best, &mean))| Trace { generation, best, mean })
            .collect()
    }
}

/// Produces a mutant vector for member `target`; crossover and bounds
/// handling are applied by the driver.
pub trait Strategy: Sync {
    fn mutant(&self, pop: &[Vec<f64>], best: usize, target: usize, f: f64, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// `x_r1 + F (x_r2 − x_r3)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rand1Bin;

/// `x_best + F (x_r1 − x_r2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Best1Bin;

/// `k` distinct indices below `n`, all different from `exclude`.
fn distinct(n: usize, exclude: usize, k: usize, rng: &mut ChaCha8Rng) -> [usize; 3] {
    let mut out = [usize::MAX; 3];
    let mut filled = 0;
    while filled < k {
        let r = rng.random_range(0..n);
        if r != exclude && !out[..filled].contains(&r) {
            out[filled] = r;
            filled += 1;
        }
    }
    out
}

impl Strategy for Rand1Bin {
    fn mutant(&self, pop: &[Vec<f64>], _best: usize, target: usize, f: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let [a, b, c] = distinct(pop.len(), target, 3, rng);
        pop[a].iter().zip(&pop[b]).zip(&pop[c]).map(|((x, y), z)| x + f * (y - z)).collect()
    }
}

impl Strategy for Best1Bin {
    fn mutant(&self, pop: &[Vec<f64>], best: usize, target: usize, f: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let [a, b, _] = distinct(pop.len(), target, 2, rng);
        pop[best].iter().zip(&pop[a]).zip(&pop[b]).map(|((x, y), z)| x + f * (y - z)).collect()
    }
}

fn member_rng(seed: u64, generation: usize, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | member as u64);
    rng
}

/// Minimizes `objective` over the configured box with the configured strategy.
pub fn minimize<F>(objective: F, config: &OptimizerConfig) -> Result<FitResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    minimize_with(objective, config, config.strategy.strategy())
}

pub fn minimize_with<F>(objective: F, config: &OptimizerConfig, strategy: &dyn Strategy) -> Result<FitResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::numeric(format!("cannot start worker pool: {e}")))?;
            pool.install(|| run(&objective, config, strategy))
        }
        None => run(&objective, config, strategy),
    }
}

fn finite_mean(values: &[f64]) -> f64 {
    let (sum, count) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn argmin(values: &[f64]) -> usize {
    // First index wins ties, so the choice is order-independent.
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] || !values[best].is_finite() && v.is_finite() {
            best = i;
        }
    }
    best
}

fn run(objective: &(dyn Fn(&[f64]) -> f64 + Sync), config: &OptimizerConfig, strategy: &dyn Strategy) -> Result<FitResult> {
    let np = config.population_size;
    let dim = config.bounds.len();
    let bounds = &config.bounds;

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|i| {
            let mut rng = member_rng(config.seed, 0, i);
            bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()
        })
        .collect();
    let mut fitness: Vec<f64> = pop.par_iter().map(|x| objective(x)).collect();
    let mut evaluations = np as u64;
    let mut rejected = 0u64;
    for (i, f) in fitness.iter_mut().enumerate() {
        if !f.is_finite() {
            log::debug!("initial member {i} has non-finite objective {f}; rejected");
            *f = f64::INFINITY;
            rejected += 1;
        }
    }
    if rejected == np as u64 {
        return Err(Error::numeric("every initial candidate has a non-finite objective"));
    }

    let mut best = argmin(&fitness);
    let mut history = vec![fitness[best]];
    let mut mean_history = vec![finite_mean(&fitness)];

    for generation in 1..=config.generations {
        let snapshot = &pop;
        let trials: Vec<(Vec<f64>, f64)> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut rng = member_rng(config.seed, generation, i);
                let mutant = strategy.mutant(snapshot, best, i, config.mutation_factor, &mut rng);
                let forced = rng.random_range(0..dim);
                let trial: Vec<f64> = (0..dim)
                    .map(|j| {
                        let take = j == forced || rng.random::<f64>() < config.crossover_rate;
                        let v = if take { mutant[j] } else { snapshot[i][j] };
                        let (lo, hi) = bounds[j];
                        // Out-of-box components land halfway back to the parent.
                        if v < lo {
                            0.5 * (lo + snapshot[i][j])
                        } else if v > hi {
                            0.5 * (hi + snapshot[i][j])
                        } else {
                            v
                        }
                    })
                    .collect();
                let f = objective(&trial);
                (trial, f)
            })
            .collect();
        evaluations += np as u64;

        let mut bad = 0usize;
        for (i, (trial, f)) in trials.into_iter().enumerate() {
            if !f.is_finite() {
                log::debug!("generation {generation} member {i}: non-finite objective {f}; rejected");
                bad += 1;
                continue;
            }
            if f <= fitness[i] {
                pop[i] = trial;
                fitness[i] = f;
            }
        }
        rejected += bad as u64;
        if bad == np {
            return Err(Error::numeric(format!(
                "every trial in generation {generation} has a non-finite objective"
            )));
        }
        if bad > 0 {
            log::warn!("generation {generation}: rejected {bad} of {np} trials with non-finite objective");
        }
        best = argmin(&fitness);
        history.push(fitness[best]);
        mean_history.push(finite_mean(&fitness));
        log::trace!("generation {generation}: best {}", fitness[best]);
    }

    Ok(FitResult {
        best_params: pop[best].clone(),
        best_objective: fitness[best],
        history,
        mean_history,
        evaluations,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deposition::diagonal_rate_1d;
    use crate::synth::{FnTarget1D, PeriodicGrid, TargetPattern1D};
    use std::f64::consts::PI;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn sphere_config(seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            population_size: 40,
            generations: 200,
            ..OptimizerConfig::new(vec![(-1.0, 1.0); 5], seed)
        }
    }

    #[test]
    fn sphere_smoke() {
        let r = minimize(sphere, &sphere_config(7)).unwrap();
        assert!(r.best_objective <= 1e-6, "{}", r.best_objective);
        assert_eq!(r.history.len(), 201);
        assert_eq!(r.evaluations, 40 * 201);
        assert_eq!(*r.history.last().unwrap(), r.best_objective);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.best_params.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn best1bin_strategy() {
        let cfg = OptimizerConfig { strategy: StrategyKind::Best1Bin, ..sphere_config(3) };
        assert!(minimize(sphere, &cfg).unwrap().best_objective <= 1e-6);
    }

    #[test]
    fn deterministic_across_threads() {
        let rastrigin = |x: &[f64]| x.iter().map(|v| v * v - (2.0 * PI * v).cos() + 1.0).sum::<f64>();
        let mut cfg = OptimizerConfig { generations: 60, ..OptimizerConfig::new(vec![(-3.0, 3.0); 4], 11) };
        cfg.threads = Some(1);
        let a = minimize(rastrigin, &cfg).unwrap();
        cfg.threads = Some(4);
        let b = minimize(rastrigin, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 12;
        assert_ne!(minimize(rastrigin, &cfg).unwrap().best_params, a.best_params);
    }

    #[test]
    fn rejects_non_finite() {
        let half = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { x[0] * x[0] + x[1] * x[1] };
        let cfg = OptimizerConfig { generations: 30, ..OptimizerConfig::new(vec![(-1.0, 1.0); 2], 5) };
        let r = minimize(half, &cfg).unwrap();
        assert!(r.rejected > 0);
        assert!(r.best_objective.is_finite() && r.best_params[0] <= 0.0);

        let err = minimize(|_: &[f64]| f64::INFINITY, &cfg).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn aborts_when_a_generation_is_all_rejected() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let cfg = OptimizerConfig { population_size: 8, generations: 5, ..OptimizerConfig::new(vec![(0.0, 1.0)], 1) };
        let f = |x: &[f64]| {
            if calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst) < 8 {
                x[0]
            } else {
                f64::NAN
            }
        };
        assert!(matches!(minimize(f, &cfg), Err(Error::Numeric(_))));
    }

    #[test]
    fn invalid_configs() {
        let base = OptimizerConfig::new(vec![(0.0, 1.0)], 0);
        for bad in [
            OptimizerConfig { population_size: 3, ..base.clone() },
            OptimizerConfig { generations: 0, ..base.clone() },
            OptimizerConfig { mutation_factor: 2.0, ..base.clone() },
            OptimizerConfig { crossover_rate: 1.5, ..base.clone() },
            OptimizerConfig { bounds: vec![(1.0, 0.0)], ..base.clone() },
            OptimizerConfig { threads: Some(0), ..base.clone() },
        ] {
            assert!(matches!(minimize(sphere, &bad), Err(Error::Usage(_))));
        }
        assert_eq!(default_population(3), 45);
        assert_eq!(default_population(40), 200);
    }

    #[test]
    fn recovers_noon_phase() {
        let grid = PeriodicGrid::new(64).unwrap();
        let target = FnTarget1D::new("t", |p: f64| (1.0 + (2.0 * p).cos()) / 4.0);
        let nodes = grid.nodes();
        let objective = |x: &[f64]| {
            nodes
                .iter()
                .map(|&p| (target.value(p) - diagonal_rate_1d(2, 0, x[0], p).unwrap()).powi(2))
                .sum::<f64>()
                * grid.weight()
        };
        let cfg = OptimizerConfig { generations: 80, ..OptimizerConfig::new(vec![(0.0, 2.0 * PI - 1e-9)], 2) };
        let r = minimize(objective, &cfg).unwrap();
        let theta = r.best_params[0];
        assert!(theta.min(2.0 * PI - theta) < 1e-4, "θ = {theta}");
    }
}
