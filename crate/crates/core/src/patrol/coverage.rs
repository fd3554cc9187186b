use serde::{Deserialize, Serialize};

use super::{DetectionStrip, PatrolRoute};
use crate::error::{CelError, Result};
use crate::geom::Point2;

/// The map rectangle `[0, width] × [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapBounds {
    pub width: f64,
    pub height: f64,
}

impl MapBounds {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let b = Self { width, height };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(CelError::domain(format!(
                "map bounds must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.width / 2.0, self.height / 2.0)
    }
}

impl Default for MapBounds {
    fn default() -> Self {
        Self { width: 40.0, height: 40.0 }
    }
}

/// Per-robot detection-line counts sampled at cell centres.
///
/// A robot explicitly covers a cell when two or more of its detection lines
/// reach the cell centre.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRaster {
    nx: usize,
    ny: usize,
    resolution: f64,
    counts: Vec<Vec<u8>>,
}

impl CoverageRaster {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn robot_count(&self) -> usize {
        self.counts.len()
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new((i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution)
    }

    /// Detection lines robot `robot` has on cell `(i, j)`.
    pub fn line_count(&self, robot: usize, i: usize, j: usize) -> u8 {
        self.counts[robot][j * self.nx + i]
    }

    pub fn is_explicit(&self, robot: usize, i: usize, j: usize) -> bool {
        self.line_count(robot, i, j) >= 2
    }

    /// Number of robots explicitly covering each cell, row-major.
    pub fn explicit_counts(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.cell_count()];
        for robot in &self.counts {
            for (o, &c) in out.iter_mut().zip(robot) {
                *o += u8::from(c >= 2);
            }
        }
        out
    }

    /// Fraction of cells explicitly covered by at least one robot.
    pub fn explicit_fraction(&self) -> f64 {
        let covered = self.explicit_counts().iter().filter(|&&c| c >= 1).count();
        covered as f64 / self.cell_count() as f64
    }

    /// `(alpha, beta, gamma)`: explicit coverage, explicit overlap between
    /// robots, and cells only observable by combining two robots' lines.
    pub fn coverage_metrics(&self) -> (f64, f64, f64) {
        let (mut a, mut b, mut g) = (0usize, 0usize, 0usize);
        for cell in 0..self.cell_count() {
            let mut explicit = 0u32;
            let mut seen = 0u32;
            for robot in &self.counts {
                let c = robot[cell];
                explicit += u32::from(c >= 2);
                seen += u32::from(c >= 1);
            }
            if explicit >= 1 {
                a += 1;
            }
            if explicit >= 2 {
                b += 1;
            }
            if explicit == 0 && seen >= 2 {
                g += 1;
            }
        }
        let n = self.cell_count() as f64;
        (a as f64 / n, b as f64 / n, g as f64 / n)
    }

    fn add_strip(&mut self, robot: usize, strip: &DetectionStrip) {
        let res = self.resolution;
        let corners = strip.corners();
        let (ymin, ymax) = corners
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
        let j_lo = ((ymin / res - 0.5).floor().max(0.0)) as usize;
        let j_hi = ((ymax / res - 0.5).ceil().max(-1.0) + 1.0).min(self.ny as f64) as usize;
        let row = &mut self.counts[robot];
        for j in j_lo..j_hi {
            let y = (j as f64 + 0.5) * res;
            let Some((xlo, xhi)) = strip.row_span(y) else { continue };
            let mut lo = (xlo / res - 0.5).ceil().max(0.0) as i64;
            let mut hi = (xhi / res - 0.5).floor().min(self.nx as f64 - 1.0) as i64;
            // Settle boundary cells on the exact predicate.
            let inside = |i: i64| strip.contains(Point2::new((i as f64 + 0.5) * res, y));
            while lo > 0 && inside(lo - 1) {
                lo -= 1;
            }
            while lo <= hi && !inside(lo) {
                lo += 1;
            }
            while hi + 1 < self.nx as i64 && inside(hi + 1) {
                hi += 1;
            }
            while hi >= lo && !inside(hi) {
                hi -= 1;
            }
            if lo > hi {
                continue;
            }
            let base = j * self.nx;
            for c in &mut row[base + lo as usize..=base + hi as usize] {
                *c = c.saturating_add(1);
            }
        }
    }
}

/// Rasterizes detection-line counts for every route over `bounds`.
pub fn coverage_raster(
    routes: &[PatrolRoute],
    sensing_ranges: &[f64],
    bounds: &MapBounds,
    resolution: f64,
) -> Result<CoverageRaster> {
    bounds.validate()?;
    if !(resolution > 0.0) {
        return Err(CelError::domain(format!("raster resolution must be positive, got {resolution}")));
    }
    if routes.len() != sensing_ranges.len() {
        return Err(CelError::domain(format!(
            "{} routes but {} sensing ranges",
            routes.len(),
            sensing_ranges.len()
        )));
    }
    let nx = (bounds.width / resolution).ceil() as usize;
    let ny = (bounds.height / resolution).ceil() as usize;
    let mut raster = CoverageRaster {
        nx,
        ny,
        resolution,
        counts: vec![vec![0u8; nx * ny]; routes.len()],
    };
    for (robot, (route, &range)) in routes.iter().zip(sensing_ranges).enumerate() {
        for strip in route.detection_strips(range) {
            raster.add_strip(robot, &strip);
        }
    }
    Ok(raster)
}
