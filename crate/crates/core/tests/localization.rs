use std::f64::consts::{FRAC_PI_2, PI};

use cel_swarm::localization::*;
use cel_swarm::patrol::{build_route, MapBounds, PatrolRoute, PatrolShape, ShapeKind};
use cel_swarm::rf_model::{mean_received_power, AntennaConfig, EmitterSource, NoiseModel, SensingKind};
use cel_swarm::rng::substream;
use cel_swarm::sim::*;
use cel_swarm::{CelError, Point2};
use proptest::prelude::*;
use rand::Rng;

fn concurrent_lines(rng: &mut impl Rng, through: Point2, n: usize) -> Vec<TriangulationLine> {
    // distinct orientations spread over [0, π) with jitter, anchors slid along each line
    let base = rng.random_range(0.0..PI);
    (0..n)
        .map(|k| {
            let phi = base + PI * (k as f64 + rng.random_range(0.1..0.9)) / n as f64;
            let t = rng.random_range(-50.0..50.0);
            TriangulationLine::new(through + Point2::from_angle(phi) * t, phi)
        })
        .collect()
}

#[test]
fn concurrent_bundles_recover_the_point() {
    let mut rng = substream(404, &[1]);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Point2::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        let n = rng.random_range(2..=10);
        let lines = concurrent_lines(&mut rng, p, n);
        let ix = least_squares_intersection(&lines).unwrap();
        worst = worst.max(ix.point.distance(p));
        assert!(ix.residual < 1e-16, "residual {}", ix.residual);
    }
    assert!(worst <= 1e-9, "worst {worst}");
}

#[test]
fn parallel_bundles_are_degenerate() {
    let mut rng = substream(404, &[2]);
    for _ in 0..200 {
        let phi = rng.random_range(0.0..PI);
        let n = rng.random_range(2..=10);
        let lines: Vec<_> = (0..n)
            .map(|_| {
                let offset = Point2::from_angle(phi + FRAC_PI_2) * rng.random_range(-20.0..20.0);
                TriangulationLine::new(offset, phi + if rng.random::<bool>() { PI } else { 0.0 })
            })
            .collect();
        assert!(matches!(least_squares_intersection(&lines), Err(CelError::DegenerateGeometry { .. })));
    }
}

#[test]
fn fewer_than_two_lines() {
    let one = [TriangulationLine::new(Point2::default(), 0.3)];
    assert!(matches!(
        least_squares_intersection(&one),
        Err(CelError::InsufficientData { needed: 2, got: 1 })
    ));
    assert!(least_squares_intersection(&[]).is_err());
}

#[test]
fn inconsistent_lines_minimize_squared_distance() {
    // three lines forming a triangle: LS point is where the gradient of the
    // summed squared distances vanishes
    let lines = [
        TriangulationLine::new(Point2::new(0.0, 0.0), 0.0),
        TriangulationLine::new(Point2::new(0.0, 0.0), FRAC_PI_2),
        TriangulationLine::new(Point2::new(3.0, 0.0), 3.0 * PI / 4.0),
    ];
    let ix = least_squares_intersection(&lines).unwrap();
    let cost = |p: Point2| lines.iter().map(|l| l.signed_distance(p).powi(2)).sum::<f64>();
    assert!((cost(ix.point) - ix.residual).abs() < 1e-12);
    for d in [Point2::new(1e-4, 0.0), Point2::new(0.0, 1e-4), Point2::new(-1e-4, 1e-4)] {
        assert!(cost(ix.point + d) > cost(ix.point));
    }
}

fn bundle(seed: u64) -> Vec<TriangulationLine> {
    let mut rng = substream(seed, &[3]);
    (0..5)
        .map(|_| {
            let a = Point2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
            TriangulationLine::new(a, rng.random_range(0.0..PI))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn intersection_is_equivariant(seed in any::<u64>(), dx in -500.0..500.0f64, dy in -500.0..500.0f64, w in 0.0..std::f64::consts::TAU) {
        let lines = bundle(seed);
        let Ok(base) = least_squares_intersection(&lines) else { return Ok(()) };
        let shift = Point2::new(dx, dy);
        let moved: Vec<_> = lines.iter().map(|l| TriangulationLine::new(l.anchor + shift, l.phi)).collect();
        let m = least_squares_intersection(&moved).unwrap();
        prop_assert!(m.point.distance(base.point + shift) < 1e-7 * (1.0 + base.point.norm()));
        let turned: Vec<_> = lines
            .iter()
            .map(|l| TriangulationLine::new(l.anchor.rotate_about(Point2::default(), w), l.phi + w))
            .collect();
        let r = least_squares_intersection(&turned).unwrap();
        prop_assert!(r.point.distance(base.point.rotate_about(Point2::default(), w)) < 1e-7 * (1.0 + base.point.norm()));
        prop_assert!((r.residual - base.residual).abs() < 1e-9 * (1.0 + base.residual));
    }
}

fn route(kind: ShapeKind, sensing: SensingKind, c: Point2, rot: f64, edge: f64) -> PatrolRoute {
    build_route(PatrolShape::new(kind, c, rot, edge).unwrap(), sensing)
}

fn quiet() -> NoiseModel {
    NoiseModel::new(0.0, 0).unwrap()
}

fn source(x: f64, y: f64) -> EmitterSource {
    EmitterSource { position: Point2::new(x, y), power_tx: 25.0, frequency: 1.4e9 }
}

#[test]
fn trace_budget_for_triangles() {
    let centres = [(10.0, 10.0), (30.0, 10.0), (10.0, 30.0), (30.0, 30.0)];
    for sensing in SensingKind::ALL {
        let routes: Vec<_> = centres
            .iter()
            .map(|&(x, y)| route(ShapeKind::Triangle, sensing, Point2::new(x, y), 0.2, 8.0))
            .collect();
        let antennas: Vec<_> = routes.iter().map(|r| antenna_for_route(r, 8.0).unwrap()).collect();
        let traces = run_trial(&routes, &source(20.0, 20.0), &antennas, &quiet(), &SamplingConfig::default()).unwrap();
        let result = localize(&traces, &MapBounds::default(), &LocalizerConfig::default());
        match sensing {
            SensingKind::Omnidirectional => {
                assert_eq!(traces.len(), 12);
                assert!(result.line_count <= 12);
            }
            SensingKind::Directional => {
                assert_eq!(traces.len(), 4 * (3 + 3) * 2);
                assert!(result.line_count <= 48);
                let vertex = traces.iter().filter(|t| t.segment.kind == SegmentKind::Vertex).count();
                assert_eq!(vertex, 24);
            }
        }
    }
}

#[test]
fn noiseless_samples_equal_the_mean_model() {
    let r = route(ShapeKind::Square, SensingKind::Directional, Point2::new(12.0, 9.0), 0.7, 6.0);
    let ant = antenna_for_route(&r, 8.0).unwrap();
    let src = source(14.5, 3.0);
    let traces = run_trial(std::slice::from_ref(&r), &src, std::slice::from_ref(&ant), &quiet(), &SamplingConfig::default()).unwrap();
    for t in &traces {
        for s in &t.samples {
            let want = mean_received_power(&src, s.position, s.heading, &ant, t.antenna).unwrap();
            assert_eq!(s.rss, want);
        }
    }
    let edge = traces.iter().find(|t| t.segment.kind == SegmentKind::Edge).unwrap();
    assert_eq!(edge.samples.len(), 61);
    let e = r.edge(edge.segment.index);
    assert_eq!(edge.samples[0].position, e.start);
    assert_eq!(edge.samples.last().unwrap().position, e.end);
    for w in edge.samples.windows(2) {
        assert!((w[0].position.distance(w[1].position) - 0.1).abs() < 1e-9);
    }
    let vertex = traces.iter().find(|t| t.segment.kind == SegmentKind::Vertex).unwrap();
    for w in vertex.samples.windows(2) {
        assert!(w[1].heading < w[0].heading, "turns are clockwise");
        assert!(w[0].heading - w[1].heading <= 1f64.to_radians() + 1e-12);
    }
}

#[test]
fn vertex_sweeps_need_directional_antennas() {
    let r = route(ShapeKind::Square, SensingKind::Omnidirectional, Point2::new(5.0, 5.0), 0.0, 4.0);
    let omni = AntennaConfig::omnidirectional();
    assert!(simulate_vertex(&r, 0, 0, &source(1.0, 1.0), &omni, &quiet(), 0.01).is_err());
    assert!(simulate_edge(&r, 0, 0, &source(1.0, 1.0), &omni, &quiet(), 5.0).is_err());
}

#[test]
fn noiseless_omni_recovers_sources_between_routes() {
    let routes: Vec<_> = [(14.0, 14.0, 0.1), (26.0, 14.0, 0.9), (14.0, 26.0, 1.7), (26.0, 26.0, 2.5)]
        .iter()
        .map(|&(x, y, w)| route(ShapeKind::Square, SensingKind::Omnidirectional, Point2::new(x, y), w, 12.0))
        .collect();
    let antennas = vec![AntennaConfig::omnidirectional(); 4];
    let mut rng = substream(8, &[0]);
    for _ in 0..40 {
        let src = source(rng.random_range(15.0..25.0), rng.random_range(15.0..25.0));
        let traces = run_trial(&routes, &src, &antennas, &quiet(), &SamplingConfig::default()).unwrap();
        let r = localize(&traces, &MapBounds::default(), &LocalizerConfig::default());
        assert!(r.success, "{:?}", src.position);
        let err = r.predicted.unwrap().distance(src.position);
        assert!(err <= 0.2, "error {err} at {:?}", src.position);
    }
}

#[test]
fn noiseless_directional_line_passes_near_the_source() {
    let r = route(ShapeKind::Hexagon, SensingKind::Directional, Point2::new(20.0, 20.0), 0.4, 8.0);
    let ant = antenna_for_route(&r, 8.0).unwrap();
    let src = source(26.0, 13.0);
    let traces = run_trial(std::slice::from_ref(&r), &src, std::slice::from_ref(&ant), &quiet(), &SamplingConfig::default()).unwrap();
    let out = localize(&traces, &MapBounds::default(), &LocalizerConfig::default());
    assert!(out.line_count >= 2);
    for l in out.lines.iter().filter(|l| l.segment.unwrap().kind == SegmentKind::Vertex) {
        // heading step 1°: the source lies within ~1° of the vertex bearing line
        let range = l.anchor.distance(src.position);
        assert!(l.signed_distance(src.position).abs() <= range * 1f64.to_radians());
    }
}

#[test]
fn endpoint_and_threshold_rules() {
    let mut trace = RssTrace {
        segment: SegmentId { robot: 0, index: 0, kind: SegmentKind::Edge },
        antenna: 0,
        mount_offset: 0.0,
        sensing: SensingKind::Omnidirectional,
        geometry: TraceGeometry::Edge { start: Point2::default(), end: Point2::new(1.0, 0.0) },
        samples: Vec::new(),
    };
    let push = |t: &mut RssTrace, v: &[f64]| {
        t.samples = v
            .iter()
            .enumerate()
            .map(|(i, &rss)| RssSample {
                position: Point2::new(i as f64, 0.0),
                heading: 0.0,
                antenna_index: 0,
                rss,
                segment: t.segment,
            })
            .collect();
    };
    push(&mut trace, &[-40.0, -20.0, -25.0]);
    assert_eq!(extract_maximum(&trace, -30.0).unwrap().index, 1);
    assert!(extract_maximum(&trace, -19.0).is_none());
    push(&mut trace, &[-10.0, -20.0, -25.0]);
    assert!(extract_maximum(&trace, -30.0).is_none());
    push(&mut trace, &[-20.2, -20.0, -20.0, -25.0]);
    let cfg = LocalizerConfig::default();
    assert_eq!(extract_maximum(&trace, -30.0).unwrap().index, 1);
    assert!(extract_prominent_maximum(&trace, &cfg).is_none());
    let m = extract_maximum(&trace, -30.0).unwrap();
    let line = line_from_maximum(&m, &trace);
    assert_eq!(line.anchor, Point2::new(1.0, 0.0));
    assert!((line.phi - FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn lines_csv_layout() {
    let lines = [TriangulationLine::new(Point2::new(1.0, 2.0), 0.5)];
    let mut buf = Vec::new();
    write_lines_csv(&mut buf, 7, &lines).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next().unwrap(), "trial_id,robot,segment_kind,segment_index,antenna,anchor_x,anchor_y,phi");
    assert!(rows.next().unwrap().starts_with("7,"));
}

#[test]
fn traces_csv_layout() {
    let r = route(ShapeKind::Triangle, SensingKind::Omnidirectional, Point2::new(5.0, 5.0), 0.0, 3.0);
    let traces = run_trial(
        std::slice::from_ref(&r),
        &source(4.0, 4.0),
        &[AntennaConfig::omnidirectional()],
        &quiet(),
        &SamplingConfig::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_traces_csv(&mut buf, 3, &traces).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next().unwrap(), "trial_id,robot,segment_kind,segment_index,antenna,x,y,heading,rss_dbm");
    let total: usize = traces.iter().map(|t| t.samples.len()).sum();
    assert_eq!(rows.count(), total);
    assert!(text.lines().nth(1).unwrap().starts_with("3,0,edge,0,0,"));
}
