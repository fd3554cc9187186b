//! Free-space received power for an isotropic emitter seen by an
//! omnidirectional or directional receiver, with additive Gaussian RSS noise.
//!
//! All quantities are logarithmic (dBm, dBi) except the linear antenna gain
//! factor. The directional radiation pattern is a scaled, squared normalized
//! sinc, which gives a main lobe of half-width `1 / gain_factor` radians.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{CelError, Result};
use crate::geom::{wrap_pi, Point2};
use crate::rng::{substream, SimRng};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Gain reported where the sinc pattern has a null.
pub const GAIN_FLOOR_DBI: f64 = -120.0;

/// Transmit gain of the concealed emitter (isotropic).
pub const DEFAULT_TX_GAIN_DBI: f64 = 0.0;

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The concealed transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterSource {
    pub position: Point2,
    /// Transmit power (dBm).
    pub power_tx: f64,
    /// Carrier frequency (Hz).
    pub frequency: f64,
}

impl EmitterSource {
    pub fn new(position: Point2, power_tx: f64, frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(CelError::domain(format!("frequency must be positive, got {frequency}")));
        }
        Ok(Self { position, power_tx, frequency })
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency)
    }
}

/// Receiver sensing capability of a robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensingKind {
    #[serde(rename = "omni")]
    Omnidirectional,
    #[serde(rename = "directional")]
    Directional,
}

impl SensingKind {
    pub const ALL: [SensingKind; 2] = [SensingKind::Omnidirectional, SensingKind::Directional];

    pub fn label(self) -> &'static str {
        match self {
            SensingKind::Omnidirectional => "omni",
            SensingKind::Directional => "directional",
        }
    }
}

/// Receiver antenna layout on one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaConfig {
    kind: SensingKind,
    gain_factor_linear: f64,
    mount_offsets: Vec<f64>,
}

impl AntennaConfig {
    pub fn omnidirectional() -> Self {
        Self {
            kind: SensingKind::Omnidirectional,
            gain_factor_linear: 1.0,
            mount_offsets: vec![0.0],
        }
    }

    /// Two identical antennas mounted at `+psi` and `-psi` from the robot's
    /// front. Index 0 is `+psi` (left of travel), index 1 is `-psi`.
    pub fn directional(gain_factor_linear: f64, psi: f64) -> Result<Self> {
        if !(gain_factor_linear > 1.0) {
            return Err(CelError::domain(format!(
                "directional antenna needs gain factor > 1, got {gain_factor_linear}"
            )));
        }
        Ok(Self {
            kind: SensingKind::Directional,
            gain_factor_linear,
            mount_offsets: vec![psi, -psi],
        })
    }

    /// Directional pair specified by boresight gain in dBi.
    pub fn directional_dbi(boresight_dbi: f64, psi: f64) -> Result<Self> {
        Self::directional(db_to_linear(boresight_dbi), psi)
    }

    pub fn kind(&self) -> SensingKind {
        self.kind
    }

    pub fn gain_factor_linear(&self) -> f64 {
        self.gain_factor_linear
    }

    pub fn mount_offsets(&self) -> &[f64] {
        &self.mount_offsets
    }

    pub fn antenna_count(&self) -> usize {
        self.mount_offsets.len()
    }

    pub fn boresight_gain_dbi(&self) -> f64 {
        10.0 * self.gain_factor_linear.log10()
    }
}

/// Additive Gaussian RSS noise in the dB domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    std_dev: f64,
    rng_seed: u64,
}

impl NoiseModel {
    pub fn new(std_dev: f64, rng_seed: u64) -> Result<Self> {
        if !(std_dev >= 0.0) || !std_dev.is_finite() {
            return Err(CelError::domain(format!("noise std dev must be >= 0, got {std_dev}")));
        }
        Ok(Self { std_dev, rng_seed })
    }

    pub fn noiseless() -> Self {
        Self { std_dev: 0.0, rng_seed: 0 }
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// Generator for the substream identified by `keys`.
    pub fn stream(&self, keys: &[u64]) -> SimRng {
        substream(self.rng_seed, keys)
    }

    /// One draw from N(0, σ²). Consumes no randomness when σ = 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std_dev == 0.0 {
            return 0.0;
        }
        // std_dev is validated finite and positive here
        Normal::new(0.0, self.std_dev).expect("valid normal").sample(rng)
    }
}

/// Log-form Friis transmission equation (dBm).
pub fn friis_received_power(
    power_tx: f64,
    gain_tx: f64,
    gain_rx: f64,
    wavelength: f64,
    distance: f64,
) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(CelError::domain(format!("distance must be positive, got {distance}")));
    }
    if !(wavelength > 0.0) {
        return Err(CelError::domain(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(power_tx + gain_tx + gain_rx + 20.0 * (wavelength / (4.0 * PI * distance)).log10())
}

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Receive gain (dBi) at angle `theta` off boresight.
pub fn directional_gain(gain_factor_linear: f64, theta: f64) -> Result<f64> {
    if gain_factor_linear < 1.0 || gain_factor_linear.is_nan() {
        return Err(CelError::domain(format!(
            "gain factor below 1.0 is undefined, got {gain_factor_linear}"
        )));
    }
    if gain_factor_linear == 1.0 {
        return Ok(0.0);
    }
    let theta = wrap_pi(theta).abs();
    let s = sinc(gain_factor_linear * theta);
    let linear = gain_factor_linear * s * s;
    if linear <= 0.0 {
        return Ok(GAIN_FLOOR_DBI);
    }
    Ok((10.0 * linear.log10()).max(GAIN_FLOOR_DBI))
}

/// Noise-free RSS (dBm) for one antenna of a robot at `receiver_position`
/// with body heading `receiver_heading`.
pub fn mean_received_power(
    source: &EmitterSource,
    receiver_position: Point2,
    receiver_heading: f64,
    antenna: &AntennaConfig,
    mount_index: usize,
) -> Result<f64> {
    let offset = *antenna.mount_offsets.get(mount_index).ok_or_else(|| {
        CelError::domain(format!(
            "mount index {mount_index} out of range for {} antennas",
            antenna.antenna_count()
        ))
    })?;
    let to_source = source.position - receiver_position;
    let distance = to_source.norm();
    if distance == 0.0 {
        return Err(CelError::domain("receiver coincides with the emitter"));
    }
    let theta = wrap_pi(to_source.angle() - (receiver_heading + offset));
    let gain_rx = directional_gain(antenna.gain_factor_linear, theta)?;
    friis_received_power(source.power_tx, DEFAULT_TX_GAIN_DBI, gain_rx, source.wavelength(), distance)
}

/// Measured RSS: the noise-free value plus one draw from `noise`.
pub fn received_power_at_pose<R: Rng + ?Sized>(
    source: &EmitterSource,
    receiver_position: Point2,
    receiver_heading: f64,
    antenna: &AntennaConfig,
    mount_index: usize,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    let mean = mean_received_power(source, receiver_position, receiver_heading, antenna, mount_index)?;
    Ok(mean + noise.sample(rng))
}

/// Distance at which the boresight link budget falls to `power_threshold`.
pub fn sensing_range(
    power_tx: f64,
    gain_rx_boresight: f64,
    frequency: f64,
    power_threshold: f64,
) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(CelError::domain(format!("frequency must be positive, got {frequency}")));
    }
    let budget = power_tx + DEFAULT_TX_GAIN_DBI + gain_rx_boresight;
    if !(power_threshold <= budget) {
        return Err(CelError::domain(format!(
            "threshold {power_threshold} dBm is unreachable with a {budget} dBm link budget"
        )));
    }
    Ok(wavelength(frequency) / (4.0 * PI) * 10f64.powf((budget - power_threshold) / 20.0))
}
