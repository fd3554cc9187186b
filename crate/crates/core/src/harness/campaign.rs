use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{ScenarioConfig, ScenarioId};
use crate::de::{optimize, Metrics, PlanProblem};
use crate::error::{CelError, Result};
use crate::geom::Point2;
use crate::localization::{localize, LocalizationResult};
use crate::patrol::PatrolRoute;
use crate::rf_model::{AntennaConfig, EmitterSource, NoiseModel};
use crate::rng::{derive_seed, substream};
use crate::sim::{antenna_for_route, run_trial, RssTrace};

/// Stream domains under the master seed.
const STREAM_PLAN: u64 = 1;
const STREAM_SOURCE: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// Optimized routes for one scenario, as cached on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub scenario: ScenarioId,
    pub seed: u64,
    /// Fingerprint of every setting that influences planning.
    pub plan_key: String,
    pub sensing_range: f64,
    pub fitness: f64,
    pub metrics: Metrics,
    pub routes: Vec<PatrolRoute>,
}

/// Per-generation best fitness and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessRow {
    pub generation: usize,
    pub best_fitness: f64,
    #[serde(rename = "α")]
    pub alpha: f64,
    #[serde(rename = "β")]
    pub beta: f64,
    #[serde(rename = "γ")]
    pub gamma: f64,
    #[serde(rename = "δ")]
    pub delta: f64,
    #[serde(rename = "η")]
    pub eta: f64,
}

fn plan_key(scenario: &ScenarioConfig) -> Result<String> {
    let c = &scenario.campaign;
    let key = serde_json::json!({
        "scenario": scenario.id,
        "seed": c.seed,
        "robot_count": c.robot_count,
        "map": c.map,
        "power_dbm": c.power_dbm,
        "frequency_hz": c.frequency_hz,
        "threshold_dbm": c.threshold_dbm,
        "gain_dbi": scenario.receive_gain_dbi(),
        "planning": c.planning.de_config(0),
        "resolution": c.planning.resolution,
        "weights": scenario.weights(),
    });
    Ok(serde_json::to_string(&key)?)
}

pub fn plan_problem(scenario: &ScenarioConfig) -> Result<PlanProblem> {
    Ok(PlanProblem {
        shapes: scenario.shapes(),
        sensing: scenario.id.sensing,
        sensing_range: scenario.sensing_range()?,
        bounds: scenario.campaign.map,
        weights: scenario.weights(),
        resolution: scenario.campaign.planning.resolution,
    })
}

/// Runs differential evolution for `scenario`.
pub fn plan_routes(scenario: &ScenarioConfig) -> Result<(RoutePlan, Vec<FitnessRow>)> {
    let problem = plan_problem(scenario)?;
    let seed = derive_seed(scenario.campaign.seed, &[STREAM_PLAN, scenario.id.index() as u64]);
    let outcome = optimize(&problem, &scenario.campaign.planning.de_config(seed))?;
    let trace = outcome
        .trace
        .iter()
        .map(|g| FitnessRow {
            generation: g.generation,
            best_fitness: g.best_fitness,
            alpha: g.info.alpha,
            beta: g.info.beta,
            gamma: g.info.gamma,
            delta: g.info.delta,
            eta: g.info.eta,
        })
        .collect();
    let plan = RoutePlan {
        scenario: scenario.id,
        seed: scenario.campaign.seed,
        plan_key: plan_key(scenario)?,
        sensing_range: problem.sensing_range,
        fitness: outcome.fitness,
        metrics: outcome.metrics,
        routes: outcome.routes,
    };
    Ok((plan, trace))
}

pub fn plan_path(dir: &Path, id: ScenarioId) -> PathBuf {
    dir.join(format!("routes_{id}.json"))
}

pub fn fitness_path(dir: &Path, id: ScenarioId) -> PathBuf {
    dir.join(format!("fitness_{id}.csv"))
}

pub fn write_fitness_csv<W: Write>(writer: W, rows: &[FitnessRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a cached plan if one exists for the same settings, otherwise plans
/// and writes the plan plus its fitness trace to `dir`.
pub fn load_or_plan(scenario: &ScenarioConfig, dir: &Path) -> Result<RoutePlan> {
    let path = plan_path(dir, scenario.id);
    if path.exists() {
        let cached: RoutePlan = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if cached.plan_key == plan_key(scenario)? {
            return Ok(cached);
        }
    }
    let (plan, trace) = plan_routes(scenario)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, serde_json::to_string_pretty(&plan)? + "\n")?;
    write_fitness_csv(std::fs::File::create(fitness_path(dir, scenario.id))?, &trace)?;
    Ok(plan)
}

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: ScenarioId,
    pub trial: usize,
    pub x: f64,
    pub y: f64,
    pub power_dbm: f64,
    pub freq_hz: f64,
    pub success: bool,
    pub lines: usize,
    pub pred_x: Option<f64>,
    pub pred_y: Option<f64>,
    pub abs_err_m: Option<f64>,
}

impl TrialRecord {
    pub fn source_position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Uniform source draw for trial `trial` of `scenario`.
pub fn draw_source(scenario: &ScenarioConfig, trial: usize) -> EmitterSource {
    let c = &scenario.campaign;
    let mut rng = substream(c.seed, &[STREAM_SOURCE, scenario.id.index() as u64, trial as u64]);
    let mut uniform = |lo: f64, hi: f64| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let x = uniform(0.0, c.map.width);
    let y = uniform(0.0, c.map.height);
    let power_tx = uniform(c.power_dbm[0], c.power_dbm[1]);
    let frequency = uniform(c.frequency_hz[0], c.frequency_hz[1]);
    EmitterSource { position: Point2::new(x, y), power_tx, frequency }
}

pub fn trial_noise(scenario: &ScenarioConfig, trial: usize) -> Result<NoiseModel> {
    let c = &scenario.campaign;
    NoiseModel::new(
        c.noise_std_db,
        derive_seed(c.seed, &[STREAM_NOISE, scenario.id.index() as u64, trial as u64]),
    )
}

pub fn antennas(scenario: &ScenarioConfig, routes: &[PatrolRoute]) -> Result<Vec<AntennaConfig>> {
    routes
        .iter()
        .map(|r| antenna_for_route(r, scenario.campaign.directional_gain_dbi))
        .collect()
}

/// Simulates and localizes one source against `routes`.
pub fn simulate_source(
    scenario: &ScenarioConfig,
    routes: &[PatrolRoute],
    source: &EmitterSource,
    noise: &NoiseModel,
) -> Result<(Vec<RssTrace>, LocalizationResult)> {
    let c = &scenario.campaign;
    let traces = run_trial(routes, source, &antennas(scenario, routes)?, noise, &c.sampling)?;
    let result = localize(&traces, &c.map, &c.localizer());
    Ok((traces, result))
}

fn record(scenario: &ScenarioConfig, trial: usize, source: &EmitterSource, result: Option<&LocalizationResult>) -> TrialRecord {
    let predicted = result.and_then(|r| if r.success { r.predicted } else { None });
    TrialRecord {
        scenario: scenario.id,
        trial,
        x: source.position.x,
        y: source.position.y,
        power_dbm: source.power_tx,
        freq_hz: source.frequency,
        success: predicted.is_some(),
        lines: result.map_or(0, |r| r.line_count),
        pred_x: predicted.map(|p| p.x),
        pred_y: predicted.map(|p| p.y),
        abs_err_m: predicted.map(|p| p.distance(source.position)),
    }
}

/// Runs trial `trial`. Simulation faults (a source exactly on a sample
/// point) are recorded as failures.
pub fn run_single_trial(scenario: &ScenarioConfig, routes: &[PatrolRoute], trial: usize) -> TrialRecord {
    let source = draw_source(scenario, trial);
    let outcome = trial_noise(scenario, trial).and_then(|noise| simulate_source(scenario, routes, &source, &noise));
    record(scenario, trial, &source, outcome.as_ref().ok().map(|(_, r)| r))
}

/// All trials of one scenario, ordered by trial index.
pub fn run_scenario(scenario: &ScenarioConfig, plan: &RoutePlan) -> Vec<TrialRecord> {
    (0..scenario.campaign.trials)
        .into_par_iter()
        .map(|t| run_single_trial(scenario, &plan.routes, t))
        .collect()
}

/// Runs every scenario on a pool of `workers` threads (0 = one per core).
/// Output order is (scenario order, trial index), independent of scheduling.
pub fn run_campaign(scenarios: &[(ScenarioConfig, RoutePlan)], workers: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CelError::config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| scenarios.iter().flat_map(|(s, p)| run_scenario(s, p)).collect()))
}

/// The header is written explicitly so an empty campaign still yields one.
pub fn write_trials_csv<W: Write>(writer: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["scenario", "trial", "x", "y", "power_dbm", "freq_hz", "success", "lines", "pred_x", "pred_y", "abs_err_m"])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: std::io::Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(CelError::from)).collect()
}
