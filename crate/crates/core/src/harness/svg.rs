//! Minimal static SVG charts.

use std::fmt::Write;

use super::campaign::{RoutePlan, TrialRecord};
use super::config::{CampaignConfig, ScenarioId};
use super::stats::SummaryStats;
use crate::rf_model::SensingKind;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn sensing_color(s: SensingKind) -> &'static str {
    match s {
        SensingKind::Omnidirectional => PALETTE[0],
        SensingKind::Directional => PALETTE[1],
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear axis mapping data coordinates to the plot area.
#[derive(Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        );
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>"
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\" stroke=\"{stroke}\"/>"
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{fill}\"/>");
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, closed: bool) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            "<{tag} points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>", escape(s));
    }

    fn axes(&mut self, f: &Frame, xlabel: &str, ylabel: &str, ticks: usize) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        self.line(l, b, r, b, "black", 1.0);
        self.line(l, b, l, t, "black", 1.0);
        for i in 0..=ticks {
            let u = i as f64 / ticks as f64;
            let xv = f.x0 + u * (f.x1 - f.x0);
            let yv = f.y0 + u * (f.y1 - f.y0);
            self.line(f.px(xv), b, f.px(xv), b + 4.0, "black", 1.0);
            self.text(f.px(xv), b + 16.0, "middle", &format_tick(xv));
            self.line(l - 4.0, f.py(yv), l, f.py(yv), "black", 1.0);
            self.text(l - 6.0, f.py(yv) + 4.0, "end", &format_tick(yv));
        }
        self.text((l + r) / 2.0, HEIGHT - 14.0, "middle", xlabel);
        let _ = writeln!(
            self.body,
            "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(ylabel)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = MARGIN + 8.0 + 16.0 * i as f64;
            self.rect(WIDTH - MARGIN - 130.0, y - 9.0, 10.0, 10.0, color, "none");
            self.text(WIDTH - MARGIN - 114.0, y, "start", label);
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Patrol routes with the scenario's source draws; failures drawn as crosses.
pub fn routes_plot(plan: &RoutePlan, records: &[&TrialRecord], config: &CampaignConfig) -> String {
    let f = Frame { x0: 0.0, x1: config.map.width, y0: 0.0, y1: config.map.height };
    let mut svg = Svg::new(&format!("Routes and sources: {}", plan.scenario));
    svg.axes(&f, "x (m)", "y (m)", 4);
    svg.rect(f.px(0.0), f.py(f.y1), f.px(f.x1) - f.px(0.0), f.py(0.0) - f.py(f.y1), "none", "#999");
    for (k, route) in plan.routes.iter().enumerate() {
        let pts: Vec<(f64, f64)> = route.waypoints().iter().map(|p| (f.px(p.x), f.py(p.y))).collect();
        svg.polyline(&pts, PALETTE[k % PALETTE.len()], true);
    }
    for r in records {
        let (x, y) = (f.px(r.x), f.py(r.y));
        if r.success {
            svg.circle(x, y, 2.5, "#333");
        } else {
            svg.line(x - 3.0, y - 3.0, x + 3.0, y + 3.0, "#d62728", 1.5);
            svg.line(x - 3.0, y + 3.0, x + 3.0, y - 3.0, "#d62728", 1.5);
        }
    }
    svg.finish()
}

/// Box plot of absolute error per scenario (whiskers at min/max).
pub fn error_boxplot(stats: &SummaryStats) -> String {
    let n = stats.scenarios.len().max(1);
    let ymax = stats
        .scenarios
        .iter()
        .filter_map(|s| s.error.max)
        .fold(1.0_f64, f64::max)
        .ceil();
    let f = Frame { x0: 0.0, x1: n as f64, y0: 0.0, y1: ymax };
    let mut svg = Svg::new("Absolute localization error");
    svg.axes(&f, "", "error (m)", 4);
    let slot = f.px(1.0) - f.px(0.0);
    for (i, s) in stats.scenarios.iter().enumerate() {
        let cx = f.px(i as f64 + 0.5);
        let color = sensing_color(s.scenario.sensing);
        let e = &s.error;
        if let (Some(lo), Some(q1), Some(md), Some(q3), Some(hi)) = (e.min, e.q1, e.median, e.q3, e.max) {
            let w = slot * 0.5;
            svg.line(cx, f.py(lo), cx, f.py(hi), "black", 1.0);
            svg.rect(cx - w / 2.0, f.py(q3), w, f.py(q1) - f.py(q3), color, "black");
            svg.line(cx - w / 2.0, f.py(md), cx + w / 2.0, f.py(md), "black", 2.0);
        }
        let label_y = HEIGHT - MARGIN + 30.0;
        let _ = writeln!(
            svg.body,
            "<text x=\"{cx:.2}\" y=\"{label_y:.2}\" text-anchor=\"end\" font-size=\"10\" transform=\"rotate(-30 {cx:.2} {label_y:.2})\">{}</text>",
            s.scenario
        );
    }
    svg.legend(&[("omni", sensing_color(SensingKind::Omnidirectional)), ("directional", sensing_color(SensingKind::Directional))]);
    svg.finish()
}

/// Success rate against one source parameter, binned, per sensing kind.
pub fn success_curve(records: &[TrialRecord], bounds: [f64; 2], value: impl Fn(&TrialRecord) -> f64, xlabel: &str, bins: usize) -> String {
    let f = Frame { x0: bounds[0], x1: bounds[1].max(bounds[0] + f64::EPSILON), y0: 0.0, y1: 100.0 };
    let mut svg = Svg::new(&format!("Success rate vs {xlabel}"));
    svg.axes(&f, xlabel, "success (%)", 5);
    let width = (f.x1 - f.x0) / bins as f64;
    for sensing in SensingKind::ALL {
        let mut counts = vec![(0usize, 0usize); bins];
        for r in records.iter().filter(|r| r.scenario.sensing == sensing) {
            let b = (((value(r) - f.x0) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[b].0 += 1;
            counts[b].1 += usize::from(r.success);
        }
        let pts: Vec<(f64, f64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.0 > 0)
            .map(|(i, c)| (f.px(f.x0 + (i as f64 + 0.5) * width), f.py(100.0 * c.1 as f64 / c.0 as f64)))
            .collect();
        svg.polyline(&pts, sensing_color(sensing), false);
        for (x, y) in pts {
            svg.circle(x, y, 3.0, sensing_color(sensing));
        }
    }
    svg.legend(&[("omni", sensing_color(SensingKind::Omnidirectional)), ("directional", sensing_color(SensingKind::Directional))]);
    svg.finish()
}

/// Failure counts over the map grid; darker cells hold more failures.
pub fn heatmap_plot(grid: &[Vec<usize>], config: &CampaignConfig, sensing: SensingKind) -> String {
    let f = Frame { x0: 0.0, x1: config.map.width, y0: 0.0, y1: config.map.height };
    let mut svg = Svg::new(&format!("Failed trials ({})", sensing.label()));
    svg.axes(&f, "x (m)", "y (m)", 4);
    let bins = grid.len().max(1);
    let peak = grid.iter().flatten().copied().max().unwrap_or(0).max(1);
    let cw = (f.px(f.x1) - f.px(0.0)) / bins as f64;
    let ch = (f.py(0.0) - f.py(f.y1)) / bins as f64;
    for (row, cells) in grid.iter().enumerate() {
        for (col, &count) in cells.iter().enumerate() {
            let shade = 255 - (215.0 * count as f64 / peak as f64).round() as u8;
            let fill = format!("rgb(255,{shade},{shade})");
            svg.rect(f.px(0.0) + col as f64 * cw, f.py(0.0) - (row + 1) as f64 * ch, cw, ch, &fill, "#eee");
        }
    }
    svg.text(WIDTH - MARGIN, MARGIN - 8.0, "end", &format!("max {peak} per cell"));
    svg.finish()
}

pub fn scenario_file_stem(id: ScenarioId) -> String {
    format!("routes_{id}")
}
