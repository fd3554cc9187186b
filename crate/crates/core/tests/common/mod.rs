//! Oracles shared by integration tests. They rebuild geometry from first
//! principles instead of calling the crate's strip and raster code.

#![allow(dead_code)]

use std::f64::consts::PI;

use cel_swarm::patrol::PatrolRoute;
use cel_swarm::rf_model::SensingKind;

pub type Pt = (f64, f64);

fn sub(a: Pt, b: Pt) -> Pt {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: Pt, b: Pt) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Shoelace area (absolute).
pub fn polygon_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>().abs() / 2.0
}

fn ccw(mut poly: Vec<Pt>) -> Vec<Pt> {
    let n = poly.len();
    let signed: f64 = (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum();
    if signed < 0.0 {
        poly.reverse();
    }
    poly
}

/// Sutherland–Hodgman clip of `subject` by the convex polygon `clip`.
pub fn clip_convex(subject: &[Pt], clip: &[Pt]) -> Vec<Pt> {
    let clip = ccw(clip.to_vec());
    let mut out = subject.to_vec();
    for k in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[k], clip[(k + 1) % clip.len()]);
        let inside = |p: Pt| cross(sub(b, a), sub(p, a)) >= 0.0;
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let cur = input[i];
            let prev = input[(i + input.len() - 1) % input.len()];
            let hit = || {
                let d = sub(cur, prev);
                let t = cross(sub(b, a), sub(a, prev)) / cross(sub(b, a), d);
                (prev.0 + d.0 * t, prev.1 + d.1 * t)
            };
            match (inside(prev), inside(cur)) {
                (true, true) => out.push(cur),
                (true, false) => out.push(hit()),
                (false, true) => {
                    out.push(hit());
                    out.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    out
}

/// Area of the union of convex polygons by vertical slab decomposition.
/// Slab breakpoints are all vertex abscissae and all pairwise edge crossings,
/// so within a slab the covered length varies linearly and the midpoint rule
/// is exact.
pub fn union_area(polys: &[Vec<Pt>]) -> f64 {
    let polys: Vec<&Vec<Pt>> = polys.iter().filter(|p| p.len() >= 3 && polygon_area(p) > 1e-14).collect();
    let mut edges: Vec<(Pt, Pt)> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for p in &polys {
        for i in 0..p.len() {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            edges.push((a, b));
            xs.push(a.0);
        }
    }
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let ((p, p2), (q, q2)) = (edges[i], edges[j]);
            let (r, s) = (sub(p2, p), sub(q2, q));
            let den = cross(r, s);
            if den.abs() < 1e-15 {
                continue;
            }
            let t = cross(sub(q, p), s) / den;
            let u = cross(sub(q, p), r) / den;
            if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                xs.push(p.0 + t * r.0);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 < 1e-12 {
            continue;
        }
        let xm = 0.5 * (x0 + x1);
        let mut spans: Vec<(f64, f64)> = polys.iter().filter_map(|p| vertical_span(p, xm)).collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut len = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (lo, hi) in spans {
            cur = match cur {
                Some((clo, chi)) if lo <= chi => Some((clo, chi.max(hi))),
                Some((clo, chi)) => {
                    len += chi - clo;
                    Some((lo, hi))
                }
                None => Some((lo, hi)),
            };
        }
        if let Some((clo, chi)) = cur {
            len += chi - clo;
        }
        area += len * (x1 - x0);
    }
    area
}

/// The y-interval where the vertical line `x` meets convex polygon `p`.
fn vertical_span(p: &[Pt], x: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        if (a.0 - x) * (b.0 - x) <= 0.0 && a.0 != b.0 {
            let y = a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Detection quadrilaterals of a route rebuilt from its waypoints: omni
/// strips extend `range` to both sides of each edge, directional strips
/// sweep the edge along each antenna bearing `edge heading ± psi`.
pub fn strip_quads(route: &PatrolRoute, range: f64) -> Vec<Vec<Pt>> {
    let w = route.waypoints();
    let n = w.len();
    let psi = (n as f64 - 2.0) * PI / (2.0 * n as f64);
    let mut quads = Vec::new();
    for i in 0..n {
        let a = (w[i].x, w[i].y);
        let b = (w[(i + 1) % n].x, w[(i + 1) % n].y);
        let heading = (b.1 - a.1).atan2(b.0 - a.0);
        match route.sensing() {
            SensingKind::Omnidirectional => {
                let (nx, ny) = (-heading.sin() * range, heading.cos() * range);
                quads.push(vec![(a.0 - nx, a.1 - ny), (b.0 - nx, b.1 - ny), (b.0 + nx, b.1 + ny), (a.0 + nx, a.1 + ny)]);
            }
            SensingKind::Directional => {
                for off in [psi, -psi] {
                    let (ux, uy) = ((heading + off).cos() * range, (heading + off).sin() * range);
                    quads.push(vec![a, b, (b.0 + ux, b.1 + uy), (a.0 + ux, a.1 + uy)]);
                }
            }
        }
    }
    quads
}

/// Exact area of the explicit region (two or more overlapping strips),
/// restricted to the rectangle `[0, width] × [0, height]`.
pub fn explicit_area(route: &PatrolRoute, range: f64, width: f64, height: f64) -> f64 {
    let map = vec![(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)];
    let quads = strip_quads(route, range);
    let mut pieces = Vec::new();
    for i in 0..quads.len() {
        for j in i + 1..quads.len() {
            let p = clip_convex(&clip_convex(&quads[i], &quads[j]), &map);
            if p.len() >= 3 {
                pieces.push(p);
            }
        }
    }
    union_area(&pieces)
}
