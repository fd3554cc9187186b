mod common;

use std::f64::consts::{PI, TAU};

use cel_swarm::geom::Point2;
use cel_swarm::patrol::*;
use cel_swarm::rf_model::SensingKind;
use proptest::prelude::*;

const OMNI_SR: f64 = 9.5826;
const DIR_SR: f64 = 24.0704;

fn range_for(sensing: SensingKind) -> f64 {
    match sensing {
        SensingKind::Omnidirectional => OMNI_SR,
        SensingKind::Directional => DIR_SR,
    }
}

fn route(kind: ShapeKind, sensing: SensingKind, c: Point2, rot: f64, edge: f64) -> PatrolRoute {
    build_route(PatrolShape::new(kind, c, rot, edge).unwrap(), sensing)
}

#[test]
fn oracle_self_check() {
    let a = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let b = vec![(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)];
    let ab = common::clip_convex(&a, &b);
    assert!((common::polygon_area(&ab) - 0.25).abs() < 1e-12);
    assert!((common::union_area(&[a.clone(), b]) - 1.75).abs() < 1e-12);
    let tri = vec![(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)];
    assert!((common::union_area(&[a, tri]) - 2.0).abs() < 1e-12);
}

#[test]
fn fig1_minimum_ranges() {
    let cases = [
        (ShapeKind::Triangle, SensingKind::Omnidirectional, 10.0, 11.547),
        (ShapeKind::Square, SensingKind::Omnidirectional, 10.0, 5.0),
        (ShapeKind::Hexagon, SensingKind::Directional, 3.0, 6.0),
    ];
    for (k, s, l, want) in cases {
        assert!((min_sensing_range(k, s, l) - want).abs() < 1e-3);
    }
    assert!((max_edge_length(ShapeKind::Square, SensingKind::Omnidirectional, 9.58) - 19.16).abs() < 1e-9);
    assert!((max_edge_length(ShapeKind::Triangle, SensingKind::Omnidirectional, 11.547) - 10.0).abs() < 1e-3);
    assert!((max_edge_length(ShapeKind::Hexagon, SensingKind::Directional, 24.06) - 12.03).abs() < 1e-9);
}

#[test]
fn min_max_round_trip_all_pairs() {
    for kind in ShapeKind::ALL {
        for sensing in SensingKind::ALL {
            for s in [0.5, 1.0, 9.58, 24.06, 1234.5] {
                let back = min_sensing_range(kind, sensing, max_edge_length(kind, sensing, s));
                assert!(((back - s) / s).abs() <= 1e-12, "{kind:?} {sensing:?} {s}");
            }
        }
    }
}

#[test]
fn regular_polygon_construction() {
    let r = route(ShapeKind::Square, SensingKind::Omnidirectional, Point2::default(), 0.0, 1.0);
    for p in r.waypoints() {
        assert!((p.norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }
    for e in r.edges() {
        assert!((e.length() - 1.0).abs() < 1e-12);
    }
    let h = route(ShapeKind::Hexagon, SensingKind::Directional, Point2::new(3.0, 4.0), 0.2, 2.5);
    for p in h.waypoints() {
        assert!((p.distance(Point2::new(3.0, 4.0)) - 2.5).abs() < 1e-12);
    }
    assert!((h.psi() - PI / 3.0).abs() < 1e-15);
    let t1 = route(ShapeKind::Triangle, SensingKind::Omnidirectional, Point2::default(), 0.4, 3.0);
    let t2 = route(ShapeKind::Triangle, SensingKind::Omnidirectional, Point2::default(), 0.4 + TAU / 3.0, 3.0);
    for p in t1.waypoints() {
        assert!(t2.waypoints().iter().any(|q| q.distance(*p) < 1e-12));
    }
    // clockwise: signed area negative
    let w = t1.waypoints();
    let signed: f64 = (0..3).map(|i| w[i].cross(w[(i + 1) % 3])).sum();
    assert!(signed < 0.0);
}

#[test]
fn edge_bound_enforced() {
    assert!(PatrolShape::new(ShapeKind::Square, Point2::default(), 0.0, 0.5).is_err());
}

#[test]
fn route_json_schema_round_trip() {
    let r = route(ShapeKind::Hexagon, SensingKind::Directional, Point2::new(12.5, 7.0), 1.1, 6.0);
    let json = serde_json::to_value(&r).unwrap();
    for key in ["kind", "centroid", "rotation", "edge_length", "sensing", "psi"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["centroid"], serde_json::json!([12.5, 7.0]));
    let back: PatrolRoute = serde_json::from_value(json).unwrap();
    assert_eq!(back.waypoints(), r.waypoints());
}

/// Explicit area at the critical edge length vs the clipping oracle, for every
/// shape and sensing mode, on a 0.05 m raster.
#[test]
fn critical_length_area_matches_clipping_oracle() {
    let res = 0.05;
    for kind in ShapeKind::ALL {
        for sensing in SensingKind::ALL {
            let sr = range_for(sensing);
            let l = max_edge_length(kind, sensing, sr);
            let side = 2.0 * (l / (2.0 * (PI / kind.sides() as f64).sin()) + sr) + 2.0;
            let bounds = MapBounds::new(side, side).unwrap();
            let r = route(kind, sensing, bounds.center(), 0.37, l);
            let raster = coverage_raster(std::slice::from_ref(&r), &[sr], &bounds, res).unwrap();
            let raster_area = raster.explicit_fraction() * (raster.nx() * raster.ny()) as f64 * res * res;
            let oracle = common::explicit_area(&r, sr, side, side);
            let rel = (raster_area - oracle).abs() / oracle;
            assert!(rel < 0.02, "{kind:?}/{sensing:?}: raster {raster_area:.3} oracle {oracle:.3} ({:.3}%)", rel * 100.0);
        }
    }
}

#[test]
fn clipped_by_map_edge_matches_oracle() {
    let bounds = MapBounds::new(20.0, 15.0).unwrap();
    let r = route(ShapeKind::Square, SensingKind::Omnidirectional, Point2::new(3.0, 4.0), 0.2, 12.0);
    let raster = coverage_raster(std::slice::from_ref(&r), &[OMNI_SR], &bounds, 0.05).unwrap();
    let area = raster.explicit_fraction() * 20.0 * 15.0;
    let oracle = common::explicit_area(&r, OMNI_SR, 20.0, 15.0);
    assert!((area - oracle).abs() / oracle < 0.02, "{area} vs {oracle}");
}

#[test]
fn centroid_covered_at_critical_length_omni() {
    for kind in ShapeKind::ALL {
        let l = max_edge_length(kind, SensingKind::Omnidirectional, OMNI_SR);
        let r = route(kind, SensingKind::Omnidirectional, Point2::new(20.0, 20.0), 1.3, l);
        assert!(explicit_coverage_predicate(&r, OMNI_SR, Point2::new(20.0, 20.0)), "{kind:?}");
    }
}

#[test]
fn empty_and_superimposed_rasters() {
    let bounds = MapBounds::new(10.0, 10.0).unwrap();
    let empty = coverage_raster(&[], &[], &bounds, 0.25).unwrap();
    assert_eq!(empty.coverage_metrics(), (0.0, 0.0, 0.0));
    let r = route(ShapeKind::Triangle, SensingKind::Omnidirectional, Point2::new(5.0, 5.0), 0.0, 6.0);
    let both = coverage_raster(&[r.clone(), r], &[OMNI_SR, OMNI_SR], &bounds, 0.25).unwrap();
    let (a, b, _) = both.coverage_metrics();
    assert!(a > 0.0);
    assert_eq!(a, b);
    assert!(coverage_raster(&[], &[], &MapBounds { width: 0.0, height: 1.0 }, 0.25).is_err());
}

/// Rotating a route about its centroid rotates its explicit region; cells
/// may only disagree where the rotated cell centre lies within one cell of
/// the region boundary.
#[test]
fn rotation_equivariance() {
    let res = 0.1;
    let bounds = MapBounds::new(40.0, 40.0).unwrap();
    let c = bounds.center();
    for (kind, sensing) in [
        (ShapeKind::Triangle, SensingKind::Omnidirectional),
        (ShapeKind::Square, SensingKind::Directional),
        (ShapeKind::Hexagon, SensingKind::Omnidirectional),
    ] {
        let sr = if sensing == SensingKind::Directional { 10.0 } else { 6.0 };
        let base = route(kind, sensing, c, 0.1, max_edge_length(kind, sensing, sr) * 0.9);
        let phi = 0.73;
        let turned = base.rotated(phi);
        let raster = coverage_raster(std::slice::from_ref(&turned), &[sr], &bounds, res).unwrap();
        let mut mismatches = 0;
        let mut covered = 0;
        for j in 0..raster.ny() {
            for i in 0..raster.nx() {
                let p = raster.cell_center(i, j);
                let q = p.rotate_about(c, -phi);
                let want = explicit_coverage_predicate(&base, sr, q);
                covered += usize::from(want);
                if raster.is_explicit(0, i, j) != want {
                    mismatches += 1;
                    let near_boundary = [(res, 0.0), (-res, 0.0), (0.0, res), (0.0, -res)]
                        .iter()
                        .any(|&(dx, dy)| explicit_coverage_predicate(&base, sr, q + Point2::new(dx, dy)) != want);
                    assert!(near_boundary, "{kind:?}: interior mismatch at {p:?}");
                }
            }
        }
        assert!(covered > 0);
        assert!((mismatches as f64) < 0.01 * covered as f64, "{mismatches} of {covered}");
    }
}

fn shape_strategy() -> impl Strategy<Value = ShapeKind> {
    prop_oneof![Just(ShapeKind::Triangle), Just(ShapeKind::Square), Just(ShapeKind::Hexagon)]
}

fn sensing_strategy() -> impl Strategy<Value = SensingKind> {
    prop_oneof![Just(SensingKind::Omnidirectional), Just(SensingKind::Directional)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn coverage_is_monotone_in_range(
        kind in shape_strategy(), sensing in sensing_strategy(),
        rot in 0.0..TAU, edge in 1.0..15.0f64,
        s1 in 0.5..20.0f64, grow in 0.0..10.0f64,
        qx in -25.0..25.0f64, qy in -25.0..25.0f64,
    ) {
        let r = route(kind, sensing, Point2::default(), rot, edge);
        let q = Point2::new(qx, qy);
        let s2 = s1 + grow;
        prop_assert!(detection_line_count(&r, s1, q) <= detection_line_count(&r, s2, q));
        if explicit_coverage_predicate(&r, s1, q) {
            prop_assert!(explicit_coverage_predicate(&r, s2, q));
        }
    }

    #[test]
    fn line_count_matches_oracle_quads(
        kind in shape_strategy(), sensing in sensing_strategy(),
        rot in 0.0..TAU, edge in 1.0..15.0f64, sr in 0.5..20.0f64,
        qx in -25.0..25.0f64, qy in -25.0..25.0f64,
    ) {
        let r = route(kind, sensing, Point2::default(), rot, edge);
        let q = (qx, qy);
        let quads = common::strip_quads(&r, sr);
        // skip points within 1e-6 of any quad boundary
        let margin = |quad: &Vec<common::Pt>| {
            (0..4).map(|i| {
                let (a, b) = (quad[i], quad[(i + 1) % 4]);
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                ((q.0 - a.0) * dy - (q.1 - a.1) * dx).abs() / dx.hypot(dy)
            }).fold(f64::INFINITY, f64::min)
        };
        prop_assume!(quads.iter().all(|quad| margin(quad) > 1e-6));
        let inside = quads.iter().filter(|quad| {
            let a = common::polygon_area(quad);
            let parts: f64 = (0..4).map(|i| common::polygon_area(&[quad[i], quad[(i + 1) % 4], q])).sum();
            (parts - a).abs() < 1e-9 * a.max(1.0)
        }).count();
        prop_assert_eq!(detection_line_count(&r, sr, Point2::new(qx, qy)), inside);
    }
}
