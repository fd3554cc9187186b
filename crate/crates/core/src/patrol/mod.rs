//! Regular-polygon patrol routes and their spatially explicit coverage.
//!
//! A route is a regular triangle, square or hexagon traversed clockwise.
//! Every straight edge yields at most one triangulation line per antenna: for
//! an omnidirectional receiver the line is perpendicular to the edge at the
//! RSS maximum, for a directional pair it follows the antenna boresight. The
//! set of emitter positions from which one (edge, antenna) pair can produce a
//! line is a convex [`DetectionStrip`]; a point is explicitly covered by a
//! route when at least two strips of that route contain it.

mod coverage;

pub use coverage::{coverage_raster, CoverageRaster, MapBounds};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{CelError, Result};
use crate::geom::Point2;
use crate::rf_model::SensingKind;

/// Shortest admissible patrol edge (m).
pub const MIN_EDGE_LENGTH: f64 = 1.0;

/// Slack on range comparisons so points exactly at the critical distance
/// count as covered despite rounding in the waypoint construction.
pub const RANGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Triangle,
    Square,
    Hexagon,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Triangle, ShapeKind::Square, ShapeKind::Hexagon];

    pub fn sides(self) -> usize {
        match self {
            ShapeKind::Triangle => 3,
            ShapeKind::Square => 4,
            ShapeKind::Hexagon => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShapeKind::Triangle => "triangle",
            ShapeKind::Square => "square",
            ShapeKind::Hexagon => "hexagon",
        }
    }

    /// Rotation period of the polygon, 2π/n.
    pub fn symmetry_period(self) -> f64 {
        TAU / self.sides() as f64
    }

    /// Ratio between the minimum sensing range and the edge length.
    fn range_factor(self, sensing: SensingKind) -> f64 {
        use SensingKind::*;
        match (self, sensing) {
            (ShapeKind::Triangle, Omnidirectional) => 2.0 * 3f64.sqrt() / 3.0,
            (ShapeKind::Triangle, Directional) => 2.0 / 3f64.sqrt(),
            (ShapeKind::Square, Omnidirectional) => 0.5,
            (ShapeKind::Square, Directional) => 2f64.sqrt(),
            (ShapeKind::Hexagon, Omnidirectional) => 3f64.sqrt() / 2.0,
            (ShapeKind::Hexagon, Directional) => 2.0,
        }
    }
}

/// Smallest sensing range giving full explicit coverage for an edge length.
pub fn min_sensing_range(kind: ShapeKind, sensing: SensingKind, edge_length: f64) -> f64 {
    kind.range_factor(sensing) * edge_length
}

/// Longest edge that keeps full explicit coverage for a sensing range.
pub fn max_edge_length(kind: ShapeKind, sensing: SensingKind, sensing_range: f64) -> f64 {
    sensing_range / kind.range_factor(sensing)
}

/// Directional mount offset: half the interior angle, the angle at which a
/// vertex sees the shape centroid relative to the outgoing edge.
pub fn antenna_offset_psi(kind: ShapeKind) -> f64 {
    let n = kind.sides() as f64;
    (n - 2.0) * PI / (2.0 * n)
}

/// The four decision variables of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatrolShape {
    pub kind: ShapeKind,
    pub edge_length: f64,
    pub centroid: Point2,
    pub rotation: f64,
}

impl PatrolShape {
    pub fn new(kind: ShapeKind, centroid: Point2, rotation: f64, edge_length: f64) -> Result<Self> {
        if !(edge_length >= MIN_EDGE_LENGTH - 1e-12) || !edge_length.is_finite() {
            return Err(CelError::domain(format!(
                "edge length must be at least {MIN_EDGE_LENGTH} m, got {edge_length}"
            )));
        }
        if !centroid.x.is_finite() || !centroid.y.is_finite() || !rotation.is_finite() {
            return Err(CelError::domain("non-finite shape parameters"));
        }
        Ok(Self { kind, edge_length, centroid, rotation })
    }

    pub fn circumradius(&self) -> f64 {
        self.edge_length / (2.0 * (PI / self.kind.sides() as f64).sin())
    }
}

/// One robot's closed patrol loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PatrolRoute {
    shape: PatrolShape,
    waypoints: Vec<Point2>,
    sensing: SensingKind,
    psi: f64,
}

/// Builds the clockwise regular polygon for `shape`. The first waypoint sits
/// at angle `rotation` from the centroid.
pub fn build_route(shape: PatrolShape, sensing: SensingKind) -> PatrolRoute {
    let n = shape.kind.sides();
    let r = shape.circumradius();
    let step = TAU / n as f64;
    let waypoints = (0..n)
        .map(|k| shape.centroid + Point2::from_angle(shape.rotation - step * k as f64) * r)
        .collect();
    let psi = match sensing {
        SensingKind::Omnidirectional => 0.0,
        SensingKind::Directional => antenna_offset_psi(shape.kind),
    };
    PatrolRoute { shape, waypoints, sensing, psi }
}

/// A directed patrol edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub start: Point2,
    pub end: Point2,
}

impl Edge {
    pub fn vector(&self) -> Point2 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.vector().norm()
    }

    /// Direction of travel.
    pub fn bearing(&self) -> f64 {
        self.vector().angle()
    }
}

impl PatrolRoute {
    pub fn shape(&self) -> &PatrolShape {
        &self.shape
    }

    pub fn kind(&self) -> ShapeKind {
        self.shape.kind
    }

    pub fn sensing(&self) -> SensingKind {
        self.sensing
    }

    /// Directional mount offset (0 for omnidirectional routes).
    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn waypoints(&self) -> &[Point2] {
        &self.waypoints
    }

    pub fn edge_count(&self) -> usize {
        self.waypoints.len()
    }

    /// Edge `i` runs from waypoint `i` to waypoint `i + 1` (cyclic).
    pub fn edge(&self, i: usize) -> Edge {
        let n = self.waypoints.len();
        Edge { start: self.waypoints[i % n], end: self.waypoints[(i + 1) % n] }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(|i| self.edge(i))
    }

    /// Mount offsets of this route's antenna pair, relative to the robot front.
    pub fn mount_offsets(&self) -> Vec<f64> {
        match self.sensing {
            SensingKind::Omnidirectional => vec![0.0],
            SensingKind::Directional => vec![self.psi, -self.psi],
        }
    }

    /// Incoming and outgoing bearings at waypoint `i`, the heading sweep
    /// performed while turning there. The turn is clockwise, so the outgoing
    /// bearing is `incoming - exterior_angle`.
    pub fn vertex_turn(&self, i: usize) -> (f64, f64) {
        let n = self.edge_count();
        let incoming = self.edge((i + n - 1) % n).bearing();
        (incoming, incoming - self.shape.kind.symmetry_period())
    }

    /// True when every waypoint lies inside the closed map rectangle. The
    /// rectangle is convex, so edges then lie inside too.
    pub fn within(&self, bounds: &MapBounds) -> bool {
        self.waypoints.iter().all(|p| bounds.contains(*p))
    }

    /// The (edge, antenna) detection regions for a sensing range.
    pub fn detection_strips(&self, sensing_range: f64) -> Vec<DetectionStrip> {
        let offsets = self.mount_offsets();
        let mut strips = Vec::with_capacity(self.edge_count() * offsets.len());
        for (edge_index, edge) in self.edges().enumerate() {
            for (antenna, &offset) in offsets.iter().enumerate() {
                strips.push(DetectionStrip::new(edge, edge_index, antenna, offset, self.sensing, sensing_range));
            }
        }
        strips
    }

    /// Same route rotated by `angle` about its centroid.
    pub fn rotated(&self, angle: f64) -> PatrolRoute {
        let mut shape = self.shape;
        shape.rotation += angle;
        build_route(shape, self.sensing)
    }

    pub fn spec(&self) -> RouteSpec {
        RouteSpec {
            kind: self.shape.kind,
            centroid: self.shape.centroid,
            rotation: self.shape.rotation,
            edge_length: self.shape.edge_length,
            sensing: self.sensing,
            psi: self.psi,
        }
    }
}

/// JSON form of a route:
/// `{"kind", "centroid": [x, y], "rotation", "edge_length", "sensing", "psi"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    pub kind: ShapeKind,
    pub centroid: Point2,
    pub rotation: f64,
    pub edge_length: f64,
    pub sensing: SensingKind,
    pub psi: f64,
}

impl RouteSpec {
    /// Rebuilds the route. A directional `psi` from the file overrides the
    /// shape default so hand-tuned mounts survive a round trip.
    pub fn to_route(&self) -> Result<PatrolRoute> {
        let shape = PatrolShape::new(self.kind, self.centroid, self.rotation, self.edge_length)?;
        let mut route = build_route(shape, self.sensing);
        if self.sensing == SensingKind::Directional {
            if !(self.psi.is_finite() && self.psi.abs() < PI) {
                return Err(CelError::domain(format!("invalid antenna offset {}", self.psi)));
            }
            route.psi = self.psi;
        }
        Ok(route)
    }
}

impl Serialize for PatrolRoute {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PatrolRoute {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        RouteSpec::deserialize(d)?.to_route().map_err(serde::de::Error::custom)
    }
}

/// Emitter positions from which one (edge, antenna) pair produces a line.
///
/// Points are parameterized as `start + s·edge + t·dir`. The foot `s` must be
/// strictly inside (0, 1), which excludes maxima on the vertices. For omni
/// sensing `dir` is the unit right normal and `|t| <= range`; for directional
/// sensing `dir` is the antenna boresight and `0 < t <= range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionStrip {
    pub edge_index: usize,
    pub antenna: usize,
    origin: Point2,
    edge: Point2,
    dir: Point2,
    t_min: f64,
    t_max: f64,
    two_sided: bool,
    det: f64,
}

impl DetectionStrip {
    fn new(
        edge: Edge,
        edge_index: usize,
        antenna: usize,
        offset: f64,
        sensing: SensingKind,
        range: f64,
    ) -> Self {
        let bearing = edge.bearing();
        let (dir, t_min, two_sided) = match sensing {
            SensingKind::Omnidirectional => (Point2::from_angle(bearing - FRAC_PI_2), -range, true),
            SensingKind::Directional => (Point2::from_angle(bearing + offset), 0.0, false),
        };
        let e = edge.vector();
        DetectionStrip {
            edge_index,
            antenna,
            origin: edge.start,
            edge: e,
            dir,
            t_min,
            t_max: range,
            two_sided,
            det: e.cross(dir),
        }
    }

    /// Foot and reach coordinates `(s, t)` of `q`.
    pub fn coordinates(&self, q: Point2) -> (f64, f64) {
        let d = q - self.origin;
        (d.cross(self.dir) / self.det, self.edge.cross(d) / self.det)
    }

    pub fn contains(&self, q: Point2) -> bool {
        if self.det == 0.0 {
            return false;
        }
        let (s, t) = self.coordinates(q);
        let t_ok = if self.two_sided {
            t.abs() <= self.t_max + RANGE_EPS
        } else {
            t > 0.0 && t <= self.t_max + RANGE_EPS
        };
        s > 0.0 && s < 1.0 && t_ok
    }

    /// Corner points of the closed strip, in order.
    pub fn corners(&self) -> [Point2; 4] {
        let a = self.origin + self.dir * self.t_min;
        let b = self.origin + self.edge + self.dir * self.t_min;
        let c = self.origin + self.edge + self.dir * self.t_max;
        let d = self.origin + self.dir * self.t_max;
        [a, b, c, d]
    }

    /// Closed x-interval of the strip on the horizontal line `y`, or `None`.
    pub(crate) fn row_span(&self, y: f64) -> Option<(f64, f64)> {
        if self.det == 0.0 {
            return None;
        }
        // s(x) = ((x - ox)·dy - (y - oy)·dx) / det, t(x) = (ex·(y - oy) - ey·(x - ox)) / det
        let dy = y - self.origin.y;
        let s_slope = self.dir.y / self.det;
        let s_icpt = (-self.origin.x * self.dir.y - dy * self.dir.x) / self.det;
        let t_slope = -self.edge.y / self.det;
        let t_icpt = (self.edge.x * dy + self.edge.y * self.origin.x) / self.det;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (slope, icpt, min, max) in [
            (s_slope, s_icpt, 0.0, 1.0),
            (t_slope, t_icpt, self.t_min, self.t_max),
        ] {
            if slope.abs() < 1e-15 {
                if icpt < min || icpt > max {
                    return None;
                }
                continue;
            }
            let (a, b) = ((min - icpt) / slope, (max - icpt) / slope);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// True when at least two (edge, antenna) strips of `route` contain `query`.
pub fn explicit_coverage_predicate(route: &PatrolRoute, sensing_range: f64, query: Point2) -> bool {
    detection_line_count(route, sensing_range, query) >= 2
}

/// Number of (edge, antenna) pairs of `route` that can observe `query`.
pub fn detection_line_count(route: &PatrolRoute, sensing_range: f64, query: Point2) -> usize {
    route
        .detection_strips(sensing_range)
        .iter()
        .filter(|s| s.contains(query))
        .count()
}
