//! Edge-maxima triangulation.
//!
//! Each trace contributes at most one line: it passes through the position of
//! the strongest reading (or the vertex, for a turn sweep). For omni edges the
//! line is perpendicular to the edge; for directional antennas it follows the
//! antenna boresight at the strongest reading. The emitter estimate is the
//! least-squares intersection of all lines.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{CelError, Result};
use crate::geom::{line_angle, Point2};
use crate::patrol::MapBounds;
use crate::rf_model::SensingKind;
use crate::sim::{RssTrace, SegmentId, SegmentKind, TraceGeometry};

/// Normal matrices with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e8;

/// Thresholds applied when picking maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizerConfig {
    /// Minimum RSS for a maximum to count (dBm).
    pub detection_threshold: f64,
    /// How far a maximum must rise above both trace endpoints (dB).
    pub min_prominence: f64,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self { detection_threshold: -30.0, min_prominence: 0.5 }
    }
}

/// The strongest admissible reading of one trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMaximum {
    pub index: usize,
    pub position: Point2,
    pub heading: f64,
    pub rss: f64,
}

/// Arg max of `trace`, if it clears `detection_threshold` and is not an
/// endpoint sample. Ties go to the lower index.
pub fn extract_maximum(trace: &RssTrace, detection_threshold: f64) -> Option<TraceMaximum> {
    let samples = &trace.samples;
    if samples.len() < 3 {
        return None;
    }
    let mut best = 0;
    for (i, s) in samples.iter().enumerate().skip(1) {
        if s.rss > samples[best].rss {
            best = i;
        }
    }
    let s = samples[best];
    if !(s.rss >= detection_threshold) || best == 0 || best == samples.len() - 1 {
        return None;
    }
    Some(TraceMaximum { index: best, position: s.position, heading: s.heading, rss: s.rss })
}

/// `extract_maximum` plus the prominence test against both endpoints.
pub fn extract_prominent_maximum(trace: &RssTrace, config: &LocalizerConfig) -> Option<TraceMaximum> {
    let m = extract_maximum(trace, config.detection_threshold)?;
    let first = trace.samples.first()?.rss;
    let last = trace.samples.last()?.rss;
    (m.rss - first >= config.min_prominence && m.rss - last >= config.min_prominence).then_some(m)
}

/// A triangulation line through `anchor` with orientation `phi` in [0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangulationLine {
    pub anchor: Point2,
    pub phi: f64,
    pub segment: Option<SegmentId>,
    pub antenna: usize,
}

impl TriangulationLine {
    pub fn new(anchor: Point2, phi: f64) -> Self {
        Self { anchor, phi: line_angle(phi), segment: None, antenna: 0 }
    }

    /// Signed distance from `p` to the line.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let (s, c) = self.phi.sin_cos();
        -s * (p.x - self.anchor.x) + c * (p.y - self.anchor.y)
    }
}

/// Builds the line for a maximum of `trace`.
pub fn line_from_maximum(max: &TraceMaximum, trace: &RssTrace) -> TriangulationLine {
    let (anchor, phi) = match (trace.sensing, trace.geometry) {
        (SensingKind::Omnidirectional, TraceGeometry::Edge { start, end }) => {
            (max.position, (end - start).angle() + FRAC_PI_2)
        }
        (_, TraceGeometry::Vertex { position, .. }) => (position, max.heading + trace.mount_offset),
        (SensingKind::Directional, TraceGeometry::Edge { .. }) => (max.position, max.heading + trace.mount_offset),
    };
    TriangulationLine {
        anchor,
        phi: line_angle(phi),
        segment: Some(trace.segment),
        antenna: trace.antenna,
    }
}

/// Least-squares intersection point and its squared residual `‖Ap − b‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub point: Point2,
    pub residual: f64,
    pub condition: f64,
}

/// Solves `min ‖Ap − b‖²` with rows `[−sin φ, cos φ]` and right-hand side
/// `−x₀ sin φ + y₀ cos φ`, using a Householder QR of `A`.
pub fn least_squares_intersection(lines: &[TriangulationLine]) -> Result<Intersection> {
    if lines.len() < 2 {
        return Err(CelError::InsufficientData { needed: 2, got: lines.len() });
    }
    // Conditioning is judged on the normal matrix AᵀA, computed about the
    // centroid of the anchors so translation does not affect it.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for l in lines {
        let (s, c) = l.phi.sin_cos();
        sxx += s * s;
        sxy += -s * c;
        syy += c * c;
    }
    let tr = sxx + syy;
    let disc = ((sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy).sqrt();
    let (l_max, l_min) = (tr / 2.0 + disc, tr / 2.0 - disc);
    let condition = if l_min > 0.0 { l_max / l_min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(CelError::DegenerateGeometry { condition, limit: MAX_CONDITION });
    }

    let m = lines.len();
    let origin = lines.iter().fold(Point2::default(), |acc, l| acc + l.anchor) * (1.0 / m as f64);
    let mut a0: Vec<f64> = Vec::with_capacity(m);
    let mut a1: Vec<f64> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    for l in lines {
        let (s, c) = l.phi.sin_cos();
        let rel = l.anchor - origin;
        a0.push(-s);
        a1.push(c);
        b.push(-rel.x * s + rel.y * c);
    }

    // Householder reflections on the two columns; b is transformed alongside.
    let mut r = [[0.0; 2]; 2];
    for col in 0..2 {
        let (x, other): (&mut Vec<f64>, Option<&mut Vec<f64>>) = if col == 0 {
            (&mut a0, Some(&mut a1))
        } else {
            (&mut a1, None)
        };
        let norm = x[col..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if x[col] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = x[col..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv > 0.0 {
            let reflect = |y: &mut [f64]| {
                let dot: f64 = v.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
                let k = 2.0 * dot / vv;
                for (yi, vi) in y.iter_mut().zip(&v) {
                    *yi -= k * vi;
                }
            };
            reflect(&mut x[col..]);
            if let Some(o) = other {
                reflect(&mut o[col..]);
            }
            reflect(&mut b[col..]);
        }
        r[col][col] = x[col];
        if col == 0 {
            r[0][1] = a1[0];
        }
    }
    let y = r[1][1];
    let py = b[1] / y;
    let px = (b[0] - r[0][1] * py) / r[0][0];
    let residual: f64 = b[2..].iter().map(|v| v * v).sum();
    Ok(Intersection { point: Point2::new(px, py) + origin, residual, condition })
}

/// Outcome of localizing one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult {
    pub predicted: Option<Point2>,
    pub line_count: usize,
    pub success: bool,
    pub residual: f64,
    pub lines: Vec<TriangulationLine>,
}

/// Builds every admissible line from `traces` and intersects them. Success
/// needs two or more lines whose intersection lies inside `bounds`.
pub fn localize(traces: &[RssTrace], bounds: &MapBounds, config: &LocalizerConfig) -> LocalizationResult {
    let lines: Vec<TriangulationLine> = traces
        .iter()
        .filter(|t| t.sensing == SensingKind::Directional || t.segment.kind == SegmentKind::Edge)
        .filter_map(|t| extract_prominent_maximum(t, config).map(|m| line_from_maximum(&m, t)))
        .collect();
    let line_count = lines.len();
    match least_squares_intersection(&lines) {
        Ok(ix) if bounds.contains(ix.point) => LocalizationResult {
            predicted: Some(ix.point),
            line_count,
            success: true,
            residual: ix.residual,
            lines,
        },
        Ok(ix) => LocalizationResult { predicted: None, line_count, success: false, residual: ix.residual, lines },
        Err(_) => LocalizationResult { predicted: None, line_count, success: false, residual: f64::NAN, lines },
    }
}

/// CSV columns: `trial_id,robot,segment_kind,segment_index,antenna,anchor_x,anchor_y,phi`.
pub fn write_lines_csv<W: std::io::Write>(writer: W, trial_id: usize, lines: &[TriangulationLine]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trial_id", "robot", "segment_kind", "segment_index", "antenna", "anchor_x", "anchor_y", "phi"])?;
    for l in lines {
        let (robot, kind, index) = l
            .segment
            .map_or((String::new(), String::new(), String::new()), |s| {
                (s.robot.to_string(), s.kind.label().to_string(), s.index.to_string())
            });
        w.write_record([
            trial_id.to_string(),
            robot,
            kind,
            index,
            l.antenna.to_string(),
            l.anchor.x.to_string(),
            l.anchor.y.to_string(),
            l.phi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
