//! Trial execution: robots traverse their routes once, sampling RSS along
//! every edge and, with directional antennas, while turning at every vertex.
//!
//! Motion is purely geometric. Noise is drawn per sample and per antenna from
//! a substream keyed by `(robot, segment kind, segment index, antenna)`.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{CelError, Result};
use crate::geom::Point2;
use crate::patrol::PatrolRoute;
use crate::rf_model::{received_power_at_pose, AntennaConfig, EmitterSource, NoiseModel, SensingKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Edge,
    Vertex,
}

impl SegmentKind {
    pub fn label(self) -> &'static str {
        match self {
            SegmentKind::Edge => "edge",
            SegmentKind::Vertex => "vertex",
        }
    }

    fn key(self) -> u64 {
        match self {
            SegmentKind::Edge => 0,
            SegmentKind::Vertex => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentId {
    pub robot: usize,
    pub index: usize,
    pub kind: SegmentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssSample {
    pub position: Point2,
    pub heading: f64,
    pub antenna_index: usize,
    /// Measured RSS (dBm).
    pub rss: f64,
    pub segment: SegmentId,
}

/// Where a trace was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TraceGeometry {
    Edge { start: Point2, end: Point2 },
    /// Heading swept from `heading_start` to `heading_end` at `position`.
    Vertex { position: Point2, heading_start: f64, heading_end: f64 },
}

/// Samples of one antenna over one edge traversal or vertex turn, ordered by
/// arc length or by heading sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssTrace {
    pub segment: SegmentId,
    pub antenna: usize,
    /// Mount offset of the recording antenna (rad).
    pub mount_offset: f64,
    pub sensing: SensingKind,
    pub geometry: TraceGeometry,
    pub samples: Vec<RssSample>,
}

impl RssTrace {
    pub fn max_rss(&self) -> f64 {
        self.samples.iter().map(|s| s.rss).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether any sample reaches `threshold` (dBm).
    pub fn detected(&self, threshold: f64) -> bool {
        self.max_rss() >= threshold
    }
}

/// Spatial and angular sampling resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    /// Arc-length spacing along edges (m).
    pub sample_spacing: f64,
    /// Heading step during vertex turns (rad).
    pub angular_step: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { sample_spacing: 0.1, angular_step: 1f64.to_radians() }
    }
}

/// Records one trace per antenna along edge `edge_index` of `route`.
///
/// The edge is split into `ceil(length / spacing)` equal steps so both
/// endpoints are sampled.
#[allow(clippy::too_many_arguments)]
pub fn simulate_edge(
    route: &PatrolRoute,
    robot: usize,
    edge_index: usize,
    source: &EmitterSource,
    antenna: &AntennaConfig,
    noise: &NoiseModel,
    sample_spacing: f64,
) -> Result<Vec<RssTrace>> {
    let edge = route.edge(edge_index);
    let length = edge.length();
    if !(sample_spacing > 0.0 && sample_spacing < length) {
        return Err(CelError::domain(format!(
            "sample spacing {sample_spacing} must lie in (0, {length})"
        )));
    }
    let steps = (length / sample_spacing).ceil() as usize;
    let heading = edge.bearing();
    let segment = SegmentId { robot, index: edge_index, kind: SegmentKind::Edge };
    let positions: Vec<Point2> = (0..=steps)
        .map(|k| {
            if k == steps {
                edge.end
            } else {
                edge.start + edge.vector() * (k as f64 / steps as f64)
            }
        })
        .collect();

    (0..antenna.antenna_count())
        .map(|a| {
            let mut rng = noise.stream(&[robot as u64, segment.kind.key(), edge_index as u64, a as u64]);
            let samples = positions
                .iter()
                .map(|&position| {
                    let rss = received_power_at_pose(source, position, heading, antenna, a, noise, &mut rng)?;
                    Ok(RssSample { position, heading, antenna_index: a, rss, segment })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RssTrace {
                segment,
                antenna: a,
                mount_offset: antenna.mount_offsets()[a],
                sensing: antenna.kind(),
                geometry: TraceGeometry::Edge { start: edge.start, end: edge.end },
                samples,
            })
        })
        .collect()
}

/// Records one trace per antenna while the robot turns clockwise at
/// waypoint `vertex_index`. Directional sensing only.
pub fn simulate_vertex(
    route: &PatrolRoute,
    robot: usize,
    vertex_index: usize,
    source: &EmitterSource,
    antenna: &AntennaConfig,
    noise: &NoiseModel,
    angular_step: f64,
) -> Result<Vec<RssTrace>> {
    if antenna.kind() != SensingKind::Directional {
        return Err(CelError::config("vertex sweeps require directional antennas"));
    }
    if !(angular_step > 0.0) {
        return Err(CelError::domain(format!("angular step must be positive, got {angular_step}")));
    }
    let position = route.waypoints()[vertex_index];
    let (start, end) = route.vertex_turn(vertex_index);
    let sweep = start - end;
    let steps = ((sweep / angular_step).ceil() as usize).max(2);
    let segment = SegmentId { robot, index: vertex_index, kind: SegmentKind::Vertex };
    let headings: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { end } else { start - sweep * (k as f64 / steps as f64) })
        .collect();

    (0..antenna.antenna_count())
        .map(|a| {
            let mut rng = noise.stream(&[robot as u64, segment.kind.key(), vertex_index as u64, a as u64]);
            let samples = headings
                .iter()
                .map(|&heading| {
                    let rss = received_power_at_pose(source, position, heading, antenna, a, noise, &mut rng)?;
                    Ok(RssSample { position, heading, antenna_index: a, rss, segment })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RssTrace {
                segment,
                antenna: a,
                mount_offset: antenna.mount_offsets()[a],
                sensing: antenna.kind(),
                geometry: TraceGeometry::Vertex { position, heading_start: start, heading_end: end },
                samples,
            })
        })
        .collect()
}

/// One traversal of every route. `antennas[k]` is robot `k`'s receiver.
pub fn run_trial(
    routes: &[PatrolRoute],
    source: &EmitterSource,
    antennas: &[AntennaConfig],
    noise: &NoiseModel,
    sampling: &SamplingConfig,
) -> Result<Vec<RssTrace>> {
    if routes.is_empty() {
        return Err(CelError::domain("a trial needs at least one route"));
    }
    if antennas.len() != routes.len() {
        return Err(CelError::config(format!(
            "{} routes but {} antenna configs",
            routes.len(),
            antennas.len()
        )));
    }
    let mut traces = Vec::new();
    for (robot, (route, antenna)) in routes.iter().zip(antennas).enumerate() {
        for i in 0..route.edge_count() {
            traces.extend(simulate_edge(route, robot, i, source, antenna, noise, sampling.sample_spacing)?);
            if antenna.kind() == SensingKind::Directional {
                // the turn at the end of edge i happens at waypoint i + 1
                let v = (i + 1) % route.edge_count();
                traces.extend(simulate_vertex(route, robot, v, source, antenna, noise, sampling.angular_step)?);
            }
        }
    }
    Ok(traces)
}

/// Receiver layout matching a route's sensing kind and mount offset.
pub fn antenna_for_route(route: &PatrolRoute, boresight_gain_dbi: f64) -> Result<AntennaConfig> {
    match route.sensing() {
        SensingKind::Omnidirectional => Ok(AntennaConfig::omnidirectional()),
        SensingKind::Directional => AntennaConfig::directional_dbi(boresight_gain_dbi, route.psi()),
    }
}

/// CSV columns: `trial_id,robot,segment_kind,segment_index,antenna,x,y,heading,rss_dbm`.
pub fn write_traces_csv<W: Write>(writer: W, trial_id: usize, traces: &[RssTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial_id", "robot", "segment_kind", "segment_index", "antenna", "x", "y", "heading", "rss_dbm"])?;
    for t in traces {
        for s in &t.samples {
            w.write_record([
                trial_id.to_string(),
                t.segment.robot.to_string(),
                t.segment.kind.label().to_string(),
                t.segment.index.to_string(),
                t.antenna.to_string(),
                s.position.x.to_string(),
                s.position.y.to_string(),
                s.heading.to_string(),
                s.rss.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patrol::{build_route, PatrolShape, ShapeKind};
    use crate::rf_model::mean_received_power;
    use std::f64::consts::PI;

    fn square(sensing: SensingKind) -> PatrolRoute {
        // waypoints (0,10) -> (10,10) -> (10,0) -> (0,0): first edge heads east
        let shape = PatrolShape::new(ShapeKind::Square, Point2::new(5.0, 5.0), 3.0 * PI / 4.0, 10.0).unwrap();
        build_route(shape, sensing)
    }

    fn argmax(t: &RssTrace) -> usize {
        let mut best = 0;
        for (i, s) in t.samples.iter().enumerate() {
            if s.rss > t.samples[best].rss {
                best = i;
            }
        }
        best
    }

    #[test]
    fn omni_peak_at_perpendicular_foot() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(5.0, 14.0), 25.0, 1e9).unwrap();
        let t = simulate_edge(&r, 0, 0, &src, &AntennaConfig::omnidirectional(), &NoiseModel::noiseless(), 0.1).unwrap();
        assert_eq!(t.len(), 1);
        let k = argmax(&t[0]);
        assert!(t[0].samples[k].position.distance(Point2::new(5.0, 10.0)) < 1e-9);
    }

    #[test]
    fn off_end_source_gives_monotone_trace() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(16.0, 11.0), 25.0, 1e9).unwrap();
        let t = &simulate_edge(&r, 0, 0, &src, &AntennaConfig::omnidirectional(), &NoiseModel::noiseless(), 0.1).unwrap()[0];
        for w in t.samples.windows(2) {
            assert!(w[1].rss > w[0].rss);
        }
        assert_eq!(argmax(t), t.samples.len() - 1);
    }

    #[test]
    fn edge_samples_hit_endpoints() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(3.0, 3.0), 25.0, 1e9).unwrap();
        let t = &simulate_edge(&r, 0, 1, &src, &AntennaConfig::omnidirectional(), &NoiseModel::noiseless(), 0.3).unwrap()[0];
        let e = r.edge(1);
        assert_eq!(t.samples.first().unwrap().position, e.start);
        assert_eq!(t.samples.last().unwrap().position, e.end);
        assert_eq!(t.samples.len(), 35);
    }

    #[test]
    fn directional_peak_on_boresight_crossing() {
        let r = square(SensingKind::Directional);
        let ant = antenna_for_route(&r, 8.0).unwrap();
        // antenna 1 (-psi) looks south-east from the first (eastbound) edge
        let k_expected = 30;
        let from = Point2::new(3.0, 10.0);
        let src_pos = from + Point2::from_angle(-PI / 4.0) * 2.0;
        let src = EmitterSource::new(src_pos, 25.0, 1e9).unwrap();
        let t = &simulate_edge(&r, 0, 0, &src, &ant, &NoiseModel::noiseless(), 0.1).unwrap()[1];
        // brute force over samples confirms the arg max lies on the boresight line
        let brute = (0..t.samples.len())
            .max_by(|&a, &b| {
                let pa = mean_received_power(&src, t.samples[a].position, 0.0, &ant, 1).unwrap();
                let pb = mean_received_power(&src, t.samples[b].position, 0.0, &ant, 1).unwrap();
                pa.partial_cmp(&pb).unwrap()
            })
            .unwrap();
        assert_eq!(argmax(t), brute);
        assert_eq!(argmax(t), k_expected);
    }

    #[test]
    fn vertex_sweep_spans_exterior_angle() {
        let r = square(SensingKind::Directional);
        let ant = antenna_for_route(&r, 8.0).unwrap();
        let src = EmitterSource::new(Point2::new(30.0, 30.0), 25.0, 1e9).unwrap();
        let t = simulate_vertex(&r, 0, 1, &src, &ant, &NoiseModel::noiseless(), 1f64.to_radians()).unwrap();
        assert_eq!(t.len(), 2);
        let first = t[0].samples.first().unwrap().heading;
        let last = t[0].samples.last().unwrap().heading;
        assert!(((first - last).to_degrees() - 90.0).abs() < 1e-9);
        assert_eq!(t[0].samples.len(), 91);
    }

    #[test]
    fn vertex_argmax_points_antenna_at_source() {
        let r = square(SensingKind::Directional);
        let ant = antenna_for_route(&r, 8.0).unwrap();
        let step = 1f64.to_radians();
        // at (10, 10) the robot turns from east (0) to south (-π/2); the -psi antenna
        // sweeps bearings from -π/4 to -3π/4
        let v = Point2::new(10.0, 10.0);
        let bearing = -0.4 * PI;
        let src = EmitterSource::new(v + Point2::from_angle(bearing) * 6.0, 25.0, 1e9).unwrap();
        let t = &simulate_vertex(&r, 0, 1, &src, &ant, &NoiseModel::noiseless(), step).unwrap()[1];
        let k = argmax(t);
        let pointing = t.samples[k].heading + t.mount_offset;
        assert!(crate::geom::wrap_pi(pointing - bearing).abs() <= step);
    }

    #[test]
    fn distant_out_of_sector_source_is_undetected() {
        let r = square(SensingKind::Directional);
        let ant = antenna_for_route(&r, 8.0).unwrap();
        let src = EmitterSource::new(Point2::new(-300.0, 300.0), 20.0, 2.4e9).unwrap();
        for t in simulate_vertex(&r, 0, 1, &src, &ant, &NoiseModel::noiseless(), 0.02).unwrap() {
            assert!(!t.detected(-30.0));
        }
    }

    #[test]
    fn vertex_requires_directional() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(3.0, 3.0), 25.0, 1e9).unwrap();
        let err = simulate_vertex(&r, 0, 0, &src, &AntennaConfig::omnidirectional(), &NoiseModel::noiseless(), 0.1);
        assert!(matches!(err, Err(CelError::Config(_))));
    }

    #[test]
    fn trace_counts() {
        let src = EmitterSource::new(Point2::new(3.0, 4.0), 25.0, 1e9).unwrap();
        let omni = square(SensingKind::Omnidirectional);
        let traces = run_trial(std::slice::from_ref(&omni), &src, &[AntennaConfig::omnidirectional()], &NoiseModel::noiseless(), &SamplingConfig::default()).unwrap();
        assert_eq!(traces.len(), 4);
        let dir = square(SensingKind::Directional);
        let ant = antenna_for_route(&dir, 8.0).unwrap();
        let traces = run_trial(&[dir.clone(), dir], &src, &[ant.clone(), ant], &NoiseModel::noiseless(), &SamplingConfig::default()).unwrap();
        assert_eq!(traces.len(), 2 * 2 * (4 + 4));
    }

    #[test]
    fn coincident_source_is_an_error() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(0.0, 10.0), 25.0, 1e9).unwrap();
        assert!(simulate_edge(&r, 0, 0, &src, &AntennaConfig::omnidirectional(), &NoiseModel::noiseless(), 0.1).is_err());
    }

    #[test]
    fn csv_export_has_one_row_per_sample() {
        let r = square(SensingKind::Omnidirectional);
        let src = EmitterSource::new(Point2::new(3.0, 4.0), 25.0, 1e9).unwrap();
        let traces = run_trial(&[r], &src, &[AntennaConfig::omnidirectional()], &NoiseModel::noiseless(), &SamplingConfig { sample_spacing: 1.0, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_traces_csv(&mut buf, 7, &traces).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial_id,robot,segment_kind,segment_index,antenna,x,y,heading,rss_dbm\n"));
        assert_eq!(text.lines().count(), 1 + 4 * 11);
        assert!(text.lines().nth(1).unwrap().starts_with("7,0,edge,0,0,"));
    }
}
