//! Campaign configuration. Every key has a default reproducing the standard
//! eight-scenario protocol; a TOML file may override any subset.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::de::{DeConfig, ObjectiveWeights, DEFAULT_PLAN_RESOLUTION};
use crate::error::{CelError, Result};
use crate::localization::LocalizerConfig;
use crate::patrol::{MapBounds, ShapeKind};
use crate::rf_model::{sensing_range, SensingKind};
use crate::sim::SamplingConfig;

/// Shape assignment across the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeConfig {
    Triangle,
    Square,
    Hexagon,
    /// Two triangles, one square, one hexagon.
    Mixed,
}

impl ShapeConfig {
    pub const ALL: [ShapeConfig; 4] = [ShapeConfig::Triangle, ShapeConfig::Square, ShapeConfig::Hexagon, ShapeConfig::Mixed];

    pub fn label(self) -> &'static str {
        match self {
            ShapeConfig::Triangle => "triangle",
            ShapeConfig::Square => "square",
            ShapeConfig::Hexagon => "hexagon",
            ShapeConfig::Mixed => "mixed",
        }
    }

    /// Per-robot shapes. The mixed pattern repeats for swarms other than four.
    pub fn shapes(self, robot_count: usize) -> Vec<ShapeKind> {
        const MIXED: [ShapeKind; 4] = [ShapeKind::Triangle, ShapeKind::Triangle, ShapeKind::Square, ShapeKind::Hexagon];
        (0..robot_count)
            .map(|k| match self {
                ShapeConfig::Triangle => ShapeKind::Triangle,
                ShapeConfig::Square => ShapeKind::Square,
                ShapeConfig::Hexagon => ShapeKind::Hexagon,
                ShapeConfig::Mixed => MIXED[k % 4],
            })
            .collect()
    }
}

/// One of the eight (shape configuration, sensing) scenarios, written
/// `<shape>-<sensing>`, e.g. `triangle-omni` or `mixed-directional`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScenarioId {
    pub shape_config: ShapeConfig,
    pub sensing: SensingKind,
}

impl ScenarioId {
    pub fn all() -> Vec<ScenarioId> {
        ShapeConfig::ALL
            .iter()
            .flat_map(|&shape_config| SensingKind::ALL.iter().map(move |&sensing| ScenarioId { shape_config, sensing }))
            .collect()
    }

    /// Position in [`ScenarioId::all`], used to key random streams.
    pub fn index(&self) -> usize {
        let s = ShapeConfig::ALL.iter().position(|c| *c == self.shape_config).unwrap_or(0);
        let k = SensingKind::ALL.iter().position(|c| *c == self.sensing).unwrap_or(0);
        2 * s + k
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.shape_config.label(), self.sensing.label())
    }
}

impl FromStr for ScenarioId {
    type Err = CelError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::all()
            .into_iter()
            .find(|id| id.to_string() == s)
            .ok_or_else(|| CelError::config(format!("unknown scenario '{s}'")))
    }
}

impl Serialize for ScenarioId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScenarioId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Objective weights per shape configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightPresets {
    pub triangle: ObjectiveWeights,
    pub square: ObjectiveWeights,
    pub hexagon: ObjectiveWeights,
    pub mixed: ObjectiveWeights,
}

impl Default for WeightPresets {
    fn default() -> Self {
        let w = ObjectiveWeights::default();
        Self { triangle: w, square: w, hexagon: w, mixed: w }
    }
}

impl WeightPresets {
    pub fn get(&self, c: ShapeConfig) -> ObjectiveWeights {
        match c {
            ShapeConfig::Triangle => self.triangle,
            ShapeConfig::Square => self.square,
            ShapeConfig::Hexagon => self.hexagon,
            ShapeConfig::Mixed => self.mixed,
        }
    }
}

/// Route-planning settings shared by all scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanningConfig {
    pub population_size: usize,
    pub generations: usize,
    pub differential_weight: f64,
    pub crossover_rate: f64,
    /// Coverage raster resolution inside the fitness loop (m).
    pub resolution: f64,
    pub weights: WeightPresets,
}

impl Default for PlanningConfig {
    fn default() -> Self {
        let de = DeConfig::default();
        Self {
            population_size: de.population_size,
            generations: de.generations,
            differential_weight: de.differential_weight,
            crossover_rate: de.crossover_rate,
            resolution: DEFAULT_PLAN_RESOLUTION,
            weights: WeightPresets::default(),
        }
    }
}

impl PlanningConfig {
    pub fn de_config(&self, seed: u64) -> DeConfig {
        DeConfig {
            population_size: self.population_size,
            generations: self.generations,
            differential_weight: self.differential_weight,
            crossover_rate: self.crossover_rate,
            seed,
        }
    }
}

/// The full campaign description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub robot_count: usize,
    pub trials: usize,
    pub map: MapBounds,
    /// Source transmit power bounds (dBm).
    pub power_dbm: [f64; 2],
    /// Source frequency bounds (Hz).
    pub frequency_hz: [f64; 2],
    /// Planning and detection threshold (dBm).
    pub threshold_dbm: f64,
    /// Boresight gain of each directional antenna (dBi).
    pub directional_gain_dbi: f64,
    /// RSS noise standard deviation (dB).
    pub noise_std_db: f64,
    /// Required rise of a maximum above both trace endpoints, in units of
    /// `noise_std_db`.
    pub prominence_sigma: f64,
    pub sampling: SamplingConfig,
    pub planning: PlanningConfig,
    /// Failure heatmap resolution (cells per side).
    pub heatmap_bins: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 2025,
            robot_count: 4,
            trials: 100,
            map: MapBounds::default(),
            power_dbm: [20.0, 30.0],
            frequency_hz: [0.4e9, 2.4e9],
            threshold_dbm: -30.0,
            directional_gain_dbi: 8.0,
            noise_std_db: 0.5,
            prominence_sigma: 1.0,
            sampling: SamplingConfig::default(),
            planning: PlanningConfig::default(),
            heatmap_bins: 20,
        }
    }
}

impl CampaignConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: CampaignConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        if self.robot_count == 0 {
            return Err(CelError::config("robot_count must be positive"));
        }
        let [p0, p1] = self.power_dbm;
        if !(p0 <= p1) {
            return Err(CelError::config(format!("power bounds reversed: {p0} > {p1}")));
        }
        let [f0, f1] = self.frequency_hz;
        if !(f0 > 0.0 && f0 <= f1) {
            return Err(CelError::config(format!("invalid frequency bounds [{f0}, {f1}]")));
        }
        if !(self.directional_gain_dbi > 0.0) {
            return Err(CelError::config("directional gain must be positive (dBi)"));
        }
        if !(self.noise_std_db >= 0.0) {
            return Err(CelError::config("noise std must be non-negative"));
        }
        if !(self.prominence_sigma >= 0.0) {
            return Err(CelError::config("prominence_sigma must be non-negative"));
        }
        if !(self.sampling.sample_spacing > 0.0 && self.sampling.angular_step > 0.0) {
            return Err(CelError::config("sampling steps must be positive"));
        }
        if self.heatmap_bins == 0 {
            return Err(CelError::config("heatmap_bins must be positive"));
        }
        self.planning.de_config(0).validate()?;
        for c in ShapeConfig::ALL {
            self.planning.weights.get(c).validate()?;
        }
        Ok(())
    }

    pub fn localizer(&self) -> LocalizerConfig {
        LocalizerConfig {
            detection_threshold: self.threshold_dbm,
            min_prominence: self.prominence_sigma * self.noise_std_db,
        }
    }

    pub fn scenario(&self, id: ScenarioId) -> ScenarioConfig {
        ScenarioConfig { id, campaign: self.clone() }
    }
}

/// A scenario resolved against the campaign settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: ScenarioId,
    pub campaign: CampaignConfig,
}

impl ScenarioConfig {
    pub fn shapes(&self) -> Vec<ShapeKind> {
        self.id.shape_config.shapes(self.campaign.robot_count)
    }

    pub fn receive_gain_dbi(&self) -> f64 {
        match self.id.sensing {
            SensingKind::Omnidirectional => 0.0,
            SensingKind::Directional => self.campaign.directional_gain_dbi,
        }
    }

    /// Planning range from the mid-range source power and frequency.
    pub fn sensing_range(&self) -> Result<f64> {
        let c = &self.campaign;
        let power = 0.5 * (c.power_dbm[0] + c.power_dbm[1]);
        let freq = 0.5 * (c.frequency_hz[0] + c.frequency_hz[1]);
        sensing_range(power, self.receive_gain_dbi(), freq, c.threshold_dbm)
    }

    pub fn weights(&self) -> ObjectiveWeights {
        self.campaign.planning.weights.get(self.id.shape_config)
    }
}
