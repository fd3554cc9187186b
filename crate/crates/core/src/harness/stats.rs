//! Campaign statistics: success rates, error distributions, a logistic model
//! of success against source power and frequency, and the failure heatmap.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::campaign::TrialRecord;
use super::config::{CampaignConfig, ScenarioId, ShapeConfig};
use crate::patrol::MapBounds;
use crate::rf_model::SensingKind;

const IRLS_MAX_ITER: usize = 100;
const IRLS_GRAD_TOL: f64 = 1e-8;

/// Maximum-likelihood logistic fit with Wald statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Outcomes are (quasi-)perfectly separated; coefficients are not MLEs.
    pub separated: bool,
    pub n: usize,
}

impl LogisticFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

/// Solves the symmetric positive-definite system `m x = b` by Cholesky.
fn cholesky_solve(m: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = b.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let d = m[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    let forward = |rhs: &[f64]| {
        let mut y = vec![0.0; k];
        for i in 0..k {
            y[i] = (rhs[i] - (0..i).map(|p| l[i][p] * y[p]).sum::<f64>()) / l[i][i];
        }
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            x[i] = (y[i] - (i + 1..k).map(|p| l[p][i] * x[p]).sum::<f64>()) / l[i][i];
        }
        x
    };
    let x = forward(b);
    let inverse: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let e: Vec<f64> = (0..k).map(|r| f64::from(u8::from(r == c))).collect();
            forward(&e)
        })
        .collect();
    Some((x, inverse))
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Fits `P(y) = σ(β₀ + Σ βⱼ xⱼ)` by iteratively reweighted least squares
/// (Newton's method on the log-likelihood), stopping when the score norm
#[allow(clippy::needless_range_loop)]
/// drops below 1e-8.
pub fn fit_logistic(features: &[Vec<f64>], outcomes: &[bool], names: &[&str]) -> LogisticFit {
    let n = outcomes.len();
    let k = names.len() + 1;
    let mut all_names = vec!["intercept".to_string()];
    all_names.extend(names.iter().map(|s| s.to_string()));
    let row = |i: usize| std::iter::once(1.0).chain(features[i].iter().copied());

    let positives = outcomes.iter().filter(|&&y| y).count();
    let mut beta = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut cov = vec![vec![f64::NAN; k]; k];
    let single_class = positives == 0 || positives == n;

    if !single_class {
        for iter in 0..IRLS_MAX_ITER {
            iterations = iter + 1;
            let mut info = vec![vec![0.0; k]; k];
            let mut grad = vec![0.0; k];
            for i in 0..n {
                let x: Vec<f64> = row(i).collect();
                let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
                let p = sigmoid(eta);
                let w = p * (1.0 - p);
                let r = f64::from(u8::from(outcomes[i])) - p;
                for a in 0..k {
                    grad[a] += x[a] * r;
                    for b in 0..=a {
                        info[a][b] += w * x[a] * x[b];
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    info[b][a] = info[a][b];
                }
            }
            grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            let Some((step, inverse)) = cholesky_solve(&info, &grad) else { break };
            cov = inverse;
            if grad_norm < IRLS_GRAD_TOL {
                converged = true;
                break;
            }
            for (b, s) in beta.iter_mut().zip(&step) {
                *b += s;
            }
            if beta.iter().any(|b| !b.is_finite()) {
                break;
            }
        }
    }

    // Near-certain fitted probabilities mean the likelihood has no finite maximum.
    let max_eta = (0..n)
        .map(|i| row(i).zip(&beta).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let separated = single_class || max_eta > 30.0;
    let converged = converged && !separated;
    let std_errors: Vec<f64> = (0..k).map(|a| cov[a][a].sqrt()).collect();
    let z: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let normal = Normal::standard();
    let p_values = z
        .iter()
        .map(|z| if z.is_finite() { 2.0 * (1.0 - normal.cdf(z.abs())) } else { f64::NAN })
        .collect();
    LogisticFit {
        names: all_names,
        coefficients: beta,
        std_errors,
        z,
        p_values,
        iterations,
        gradient_norm: grad_norm,
        converged,
        separated,
        n,
    }
}

/// Logistic model of success against power (dBm) and frequency (GHz), both
/// measured from `center` = (power, frequency in GHz). The intercept is then
/// the log-odds of success for a source at the center.
pub fn fit_success_model(records: &[&TrialRecord], center: [f64; 2]) -> LogisticFit {
    let features: Vec<Vec<f64>> = records
        .iter()
        .map(|r| vec![r.power_dbm - center[0], r.freq_hz / 1e9 - center[1]])
        .collect();
    let outcomes: Vec<bool> = records.iter().map(|r| r.success).collect();
    fit_logistic(&features, &outcomes, &["power_dbm", "freq_ghz"])
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub iqr: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64]) -> Self {
        let mut v: Vec<f64> = errors.to_vec();
        v.sort_by(f64::total_cmp);
        let q1 = quantile(&v, 0.25);
        let q3 = quantile(&v, 0.75);
        ErrorStats {
            count: v.len(),
            mean: (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64),
            median: quantile(&v, 0.5),
            q1,
            q3,
            iqr: q1.zip(q3).map(|(a, b)| b - a),
            min: v.first().copied(),
            max: v.last().copied(),
        }
    }
}

fn errors_of<'a>(records: impl Iterator<Item = &'a TrialRecord>) -> Vec<f64> {
    records.filter_map(|r| r.abs_err_m).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: ScenarioId,
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    /// Percent of trials localized inside the map.
    pub success_rate: f64,
    pub mean_lines: f64,
    pub error: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledSummary {
    pub sensing: SensingKind,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub error: ErrorStats,
    pub logistic: LogisticFit,
    /// Failure counts, `heatmap[row][col]` with row = y bin, col = x bin,
    /// both ascending from the map origin.
    pub failure_heatmap: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub scenarios: Vec<ScenarioSummary>,
    pub pooled: Vec<PooledSummary>,
}

impl SummaryStats {
    pub fn scenario(&self, id: ScenarioId) -> Option<&ScenarioSummary> {
        self.scenarios.iter().find(|s| s.scenario == id)
    }

    pub fn pooled(&self, sensing: SensingKind) -> Option<&PooledSummary> {
        self.pooled.iter().find(|p| p.sensing == sensing)
    }
}

fn rate(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        100.0 * successes as f64 / trials as f64
    }
}

/// Bins failed trials into a `bins × bins` grid over the map.
pub fn failure_heatmap<'a>(records: impl Iterator<Item = &'a TrialRecord>, map: &MapBounds, bins: usize) -> Vec<Vec<usize>> {
    let mut grid = vec![vec![0usize; bins]; bins];
    let bin = |v: f64, extent: f64| (((v / extent) * bins as f64).floor().max(0.0) as usize).min(bins - 1);
    for r in records.filter(|r| !r.success) {
        grid[bin(r.y, map.height)][bin(r.x, map.width)] += 1;
    }
    grid
}

/// Mid-range source power (dBm) and frequency (GHz).
pub fn model_center(config: &CampaignConfig) -> [f64; 2] {
    [
        0.5 * (config.power_dbm[0] + config.power_dbm[1]),
        0.5 * (config.frequency_hz[0] + config.frequency_hz[1]) / 1e9,
    ]
}

/// Aggregates trial records. Scenarios appear in canonical order; only
/// scenarios present in `records` are summarized.
pub fn summarize(records: &[TrialRecord], config: &CampaignConfig) -> SummaryStats {
    let scenarios = ScenarioId::all()
        .into_iter()
        .filter_map(|id| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.scenario == id).collect();
            if rs.is_empty() {
                return None;
            }
            let successes = rs.iter().filter(|r| r.success).count();
            Some(ScenarioSummary {
                scenario: id,
                trials: rs.len(),
                successes,
                failures: rs.len() - successes,
                success_rate: rate(successes, rs.len()),
                mean_lines: rs.iter().map(|r| r.lines as f64).sum::<f64>() / rs.len() as f64,
                error: ErrorStats::from_errors(&errors_of(rs.iter().copied())),
            })
        })
        .collect();

    let pooled = SensingKind::ALL
        .iter()
        .map(|&sensing| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.scenario.sensing == sensing).collect();
            let successes = rs.iter().filter(|r| r.success).count();
            PooledSummary {
                sensing,
                trials: rs.len(),
                successes,
                success_rate: rate(successes, rs.len()),
                error: ErrorStats::from_errors(&errors_of(rs.iter().copied())),
                logistic: fit_success_model(&rs, model_center(config)),
                failure_heatmap: failure_heatmap(rs.iter().copied(), &config.map, config.heatmap_bins),
            }
        })
        .collect();

    SummaryStats { scenarios, pooled }
}

/// Scenarios of one shape configuration, omni first.
pub fn shape_pair(stats: &SummaryStats, shape: ShapeConfig) -> (Option<&ScenarioSummary>, Option<&ScenarioSummary>) {
    (
        stats.scenario(ScenarioId { shape_config: shape, sensing: SensingKind::Omnidirectional }),
        stats.scenario(ScenarioId { shape_config: shape, sensing: SensingKind::Directional }),
    )
}
