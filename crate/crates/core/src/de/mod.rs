//! Differential evolution (DE/rand/1/bin) over box-bounded real vectors,
//! and the patrol-planning objective it is used with.
//!
//! Each trial vector draws from its own random substream keyed by
//! `(seed, generation, target)`, so fitness evaluations run in parallel and
//! the result is identical for any worker count.

mod objective;

pub use objective::{
    angular_diversity, evaluate_objective, optimize, CandidateSolution, Metrics, ObjectiveWeights,
    PlanOutcome, PlanProblem, DEFAULT_PLAN_RESOLUTION,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CelError, Result};
use crate::rng::substream;

/// DE hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Differential weight `F`.
    pub differential_weight: f64,
    /// Binomial crossover rate `CR`.
    pub crossover_rate: f64,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_size: 40,
            generations: 300,
            differential_weight: 0.6,
            crossover_rate: 0.9,
            seed: 0,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(CelError::config(format!(
                "population size must be at least 4, got {}",
                self.population_size
            )));
        }
        if !(self.differential_weight > 0.0 && self.differential_weight <= 2.0) {
            return Err(CelError::config(format!(
                "differential weight must lie in (0, 2], got {}",
                self.differential_weight
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(CelError::config(format!(
                "crossover rate must lie in [0, 1], got {}",
                self.crossover_rate
            )));
        }
        Ok(())
    }
}

/// Best member after one generation (generation 0 is the initial population).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord<I> {
    pub generation: usize,
    pub best_fitness: f64,
    pub info: I,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeOutcome<I> {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    pub best_info: I,
    pub trace: Vec<GenerationRecord<I>>,
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

fn argmin(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}

/// Minimizes `objective` over the box `bounds`. The objective returns the
/// fitness together with auxiliary information recorded in the trace.
pub fn minimize<I, F>(bounds: &[(f64, f64)], config: &DeConfig, objective: F) -> Result<DeOutcome<I>>
where
    I: Clone + Send,
    F: Fn(&[f64]) -> (f64, I) + Sync,
{
    config.validate()?;
    if bounds.is_empty() {
        return Err(CelError::config("empty search space"));
    }
    if let Some(&(lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(CelError::config(format!("invalid parameter bounds [{lo}, {hi}]")));
    }
    let dim = bounds.len();
    let p = config.population_size;

    let evaluated: Vec<(Vec<f64>, f64, I)> = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.seed, &[0, i as u64]);
            let x: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect();
            let (f, info) = objective(&x);
            (x, sanitize(f), info)
        })
        .collect();
    let mut population = Vec::with_capacity(p);
    let mut fitness = Vec::with_capacity(p);
    let mut infos = Vec::with_capacity(p);
    for (x, f, info) in evaluated {
        population.push(x);
        fitness.push(f);
        infos.push(info);
    }

    let mut best = argmin(&fitness);
    let mut trace = vec![GenerationRecord { generation: 0, best_fitness: fitness[best], info: infos[best].clone() }];

    for generation in 1..=config.generations {
        let trials: Vec<(Vec<f64>, f64, I)> = (0..p)
            .into_par_iter()
            .map(|target| {
                let mut rng = substream(config.seed, &[generation as u64, target as u64]);
                let mut pick = |exclude: &[usize]| loop {
                    let r = rng.random_range(0..p);
                    if !exclude.contains(&r) {
                        break r;
                    }
                };
                let a = pick(&[target]);
                let b = pick(&[target, a]);
                let c = pick(&[target, a, b]);
                let forced = rng.random_range(0..dim);
                let x: Vec<f64> = (0..dim)
                    .map(|j| {
                        let cross = j == forced || rng.random::<f64>() < config.crossover_rate;
                        let v = if cross {
                            population[a][j] + config.differential_weight * (population[b][j] - population[c][j])
                        } else {
                            population[target][j]
                        };
                        v.clamp(bounds[j].0, bounds[j].1)
                    })
                    .collect();
                let (f, info) = objective(&x);
                (x, sanitize(f), info)
            })
            .collect();

        for (target, (x, f, info)) in trials.into_iter().enumerate() {
            if f <= fitness[target] {
                population[target] = x;
                fitness[target] = f;
                infos[target] = info;
            }
        }
        best = argmin(&fitness);
        trace.push(GenerationRecord { generation, best_fitness: fitness[best], info: infos[best].clone() });
    }

    Ok(DeOutcome {
        best: population[best].clone(),
        best_fitness: fitness[best],
        best_info: infos[best].clone(),
        trace,
    })
}
