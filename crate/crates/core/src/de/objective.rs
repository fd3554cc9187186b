use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{minimize, DeConfig, GenerationRecord};
use crate::error::{CelError, Result};
use crate::geom::Point2;
use crate::patrol::{build_route, coverage_raster, max_edge_length, MapBounds, PatrolRoute, PatrolShape, ShapeKind, MIN_EDGE_LENGTH};
use crate::rf_model::SensingKind;

/// Raster resolution used inside the fitness loop (m).
pub const DEFAULT_PLAN_RESOLUTION: f64 = 0.25;

/// Weights of the planning objective
/// `-w1·alpha + w2·beta - w3·gamma - w4·delta + eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    /// Explicit coverage (rewarded).
    pub w1: f64,
    /// Explicit overlap between robots (penalized).
    pub w2: f64,
    /// Cross-robot triangulation potential (rewarded).
    pub w3: f64,
    /// Rotation diversity (rewarded).
    pub w4: f64,
    /// Added when any route leaves the map.
    pub eta_penalty: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { w1: 5.0, w2: 1.0, w3: 2.0, w4: 1.0, eta_penalty: 10.0 }
    }
}

impl ObjectiveWeights {
    /// The penalty must exceed the full span of the weighted metrics so any
    /// in-bounds candidate beats every out-of-bounds one.
    pub fn validate(&self) -> Result<()> {
        let ws = [self.w1, self.w2, self.w3, self.w4];
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(CelError::config(format!("weights must be finite and non-negative: {ws:?}")));
        }
        let span: f64 = ws.iter().sum();
        if !(self.eta_penalty.is_finite() && self.eta_penalty > span) {
            return Err(CelError::config(format!(
                "eta penalty {} must exceed w1 + w2 + w3 + w4 = {span}",
                self.eta_penalty
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            w1: self.w1 * k,
            w2: self.w2 * k,
            w3: self.w3 * k,
            w4: self.w4 * k,
            eta_penalty: self.eta_penalty * k,
        }
    }
}

/// The five planning metrics of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Metrics {
    pub fn fitness(&self, w: &ObjectiveWeights) -> f64 {
        -w.w1 * self.alpha + w.w2 * self.beta - w.w3 * self.gamma - w.w4 * self.delta + self.eta
    }
}

/// Flattened `(x_c, y_c, rotation, edge_length)` quadruples, one per robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateSolution(pub Vec<f64>);

impl CandidateSolution {
    pub fn robot_count(&self) -> usize {
        self.0.len() / 4
    }

    /// `(x_c, y_c, rotation, edge_length)` of robot `k`.
    pub fn robot(&self, k: usize) -> (f64, f64, f64, f64) {
        let v = &self.0[4 * k..4 * k + 4];
        (v[0], v[1], v[2], v[3])
    }

    pub fn from_routes(routes: &[PatrolRoute]) -> Self {
        Self(
            routes
                .iter()
                .flat_map(|r| {
                    let s = r.shape();
                    [s.centroid.x, s.centroid.y, s.rotation, s.edge_length]
                })
                .collect(),
        )
    }
}

/// Circular dispersion of the rotations, each folded by its shape's n-fold
/// symmetry: `1 - |Σ exp(i·n_k·ω_k)| / R`.
pub fn angular_diversity(shapes: &[ShapeKind], rotations: &[f64]) -> f64 {
    if shapes.is_empty() {
        return 0.0;
    }
    let (mut re, mut im) = (0.0, 0.0);
    for (kind, &w) in shapes.iter().zip(rotations) {
        let a = kind.sides() as f64 * w;
        re += a.cos();
        im += a.sin();
    }
    (1.0 - re.hypot(im) / shapes.len() as f64).clamp(0.0, 1.0)
}

/// One planning instance: robot shapes, sensing, map and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProblem {
    pub shapes: Vec<ShapeKind>,
    pub sensing: SensingKind,
    pub sensing_range: f64,
    pub bounds: MapBounds,
    pub weights: ObjectiveWeights,
    pub resolution: f64,
}

impl PlanProblem {
    pub fn validate(&self) -> Result<()> {
        if self.shapes.is_empty() {
            return Err(CelError::config("at least one robot is required"));
        }
        self.bounds.validate()?;
        self.weights.validate()?;
        if !(self.resolution > 0.0) {
            return Err(CelError::config(format!("raster resolution must be positive, got {}", self.resolution)));
        }
        for &kind in &self.shapes {
            let hi = max_edge_length(kind, self.sensing, self.sensing_range);
            if !(hi >= MIN_EDGE_LENGTH) {
                return Err(CelError::config(format!(
                    "sensing range {} m allows {} edges of only {hi} m",
                    self.sensing_range,
                    kind.label()
                )));
            }
        }
        Ok(())
    }

    /// Box bounds of the decision vector.
    pub fn parameter_bounds(&self) -> Vec<(f64, f64)> {
        self.shapes
            .iter()
            .flat_map(|&kind| {
                [
                    (0.0, self.bounds.width),
                    (0.0, self.bounds.height),
                    (0.0, TAU),
                    (MIN_EDGE_LENGTH, max_edge_length(kind, self.sensing, self.sensing_range)),
                ]
            })
            .collect()
    }

    pub fn decode(&self, candidate: &CandidateSolution) -> Result<Vec<PatrolRoute>> {
        if candidate.0.len() != 4 * self.shapes.len() {
            return Err(CelError::domain(format!(
                "candidate has {} values, expected {}",
                candidate.0.len(),
                4 * self.shapes.len()
            )));
        }
        self.shapes
            .iter()
            .enumerate()
            .map(|(k, &kind)| {
                let (x, y, w, l) = candidate.robot(k);
                Ok(build_route(PatrolShape::new(kind, Point2::new(x, y), w, l)?, self.sensing))
            })
            .collect()
    }

    pub fn metrics(&self, candidate: &CandidateSolution) -> Result<Metrics> {
        let routes = self.decode(candidate)?;
        let ranges = vec![self.sensing_range; routes.len()];
        let raster = coverage_raster(&routes, &ranges, &self.bounds, self.resolution)?;
        let (alpha, beta, gamma) = raster.coverage_metrics();
        let rotations: Vec<f64> = (0..routes.len()).map(|k| candidate.robot(k).2).collect();
        let delta = angular_diversity(&self.shapes, &rotations);
        let eta = if routes.iter().all(|r| r.within(&self.bounds)) { 0.0 } else { self.weights.eta_penalty };
        Ok(Metrics { alpha, beta, gamma, delta, eta })
    }

    pub fn evaluate(&self, candidate: &CandidateSolution) -> Result<(f64, Metrics)> {
        let m = self.metrics(candidate)?;
        Ok((m.fitness(&self.weights), m))
    }
}

/// Fitness of `candidate`. Out-of-map routes are penalized, not rejected.
pub fn evaluate_objective(
    candidate: &CandidateSolution,
    shapes: &[ShapeKind],
    sensing: SensingKind,
    sensing_range: f64,
    weights: &ObjectiveWeights,
    bounds: &MapBounds,
) -> Result<(f64, Metrics)> {
    let problem = PlanProblem {
        shapes: shapes.to_vec(),
        sensing,
        sensing_range,
        bounds: *bounds,
        weights: *weights,
        resolution: DEFAULT_PLAN_RESOLUTION,
    };
    problem.evaluate(candidate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub best: CandidateSolution,
    pub routes: Vec<PatrolRoute>,
    pub fitness: f64,
    pub metrics: Metrics,
    pub trace: Vec<GenerationRecord<Metrics>>,
}

/// Runs DE on the planning objective.
pub fn optimize(problem: &PlanProblem, config: &DeConfig) -> Result<PlanOutcome> {
    problem.validate()?;
    let bounds = problem.parameter_bounds();
    let outcome = minimize(&bounds, config, |x| {
        match problem.evaluate(&CandidateSolution(x.to_vec())) {
            Ok((f, m)) => (f, m),
            // unreachable with in-box vectors; rank last if it happens
            Err(_) => (f64::INFINITY, Metrics::default()),
        }
    })?;
    let best = CandidateSolution(outcome.best);
    let routes = problem.decode(&best)?;
    Ok(PlanOutcome {
        best,
        routes,
        fitness: outcome.best_fitness,
        metrics: outcome.best_info,
        trace: outcome.trace,
    })
}
