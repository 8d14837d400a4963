use serde::{Deserialize, Serialize};

use super::Grid;
use crate::{Error, Result};

/// Closed axis-aligned box `[lo_1, hi_1] × … × [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidGrid("box bounds must have equal, nonzero length".into()));
        }
        for d in 0..lo.len() {
            if !(lo[d] <= hi[d]) || !lo[d].is_finite() || !hi[d].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "box dimension {d}: need finite lo <= hi, got [{}, {}]",
                    lo[d], hi[d]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Membership with a small relative slack for rounding.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| {
            let eps = 1e-12 * a.abs().max(b.abs()).max(1.0);
            v >= a - eps && v <= b + eps
        })
    }

    pub fn contains_origin(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(&a, &b)| a <= 0.0 && 0.0 <= b)
    }

    /// Per-dimension widths.
    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    /// Clamp a point into the box.
    pub fn clamp(&self, x: &mut [f64]) {
        for d in 0..x.len() {
            x[d] = x[d].clamp(self.lo[d], self.hi[d]);
        }
    }
}

/// Euclidean diameter of a box: the corner-to-corner distance.
pub fn diam_box(b: &BoxSet) -> f64 {
    b.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
}

/// Euclidean diameter of a grid, equal to that of its bounding box.
pub fn diam_grid(g: &Grid) -> f64 {
    g.coords()
        .iter()
        .map(|c| {
            let w = c[c.len() - 1] - c[0];
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from `x` to the nearest grid point.
pub fn dist_point_to_grid(x: &[f64], g: &Grid) -> f64 {
    x.iter()
        .zip(g.coords())
        .map(|(&v, c)| {
            let d = axis_distance(v, c);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// One-sided Hausdorff distance from a box to a grid:
/// `sup_{x ∈ box} min_{g ∈ grid} ‖x − g‖`.
///
/// The squared distance to a rectangular grid separates across dimensions,
/// so the supremum is taken per axis over the box endpoints and the cell
/// midpoints lying inside the box.
pub fn one_sided_hausdorff(from: &BoxSet, to: &Grid) -> f64 {
    debug_assert_eq!(from.dims(), to.dims());
    (0..from.dims())
        .map(|d| {
            let (a, b) = (from.lo()[d], from.hi()[d]);
            let c = to.axis(d);
            let mut worst = axis_distance(a, c).max(axis_distance(b, c));
            for w in c.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if mid >= a && mid <= b {
                    worst = worst.max(0.5 * (w[1] - w[0]));
                }
            }
            worst * worst
        })
        .sum::<f64>()
        .sqrt()
}

/// One-sided Hausdorff distance from a finite point set to a grid.
pub fn hausdorff_points_to_grid<'a>(points: impl IntoIterator<Item = &'a [f64]>, to: &Grid) -> f64 {
    points
        .into_iter()
        .map(|p| dist_point_to_grid(p, to))
        .fold(0.0, f64::max)
}

fn axis_distance(v: f64, c: &[f64]) -> f64 {
    let p = c.partition_point(|&x| x < v);
    let mut best = f64::INFINITY;
    if p < c.len() {
        best = best.min((c[p] - v).abs());
    }
    if p > 0 {
        best = best.min((v - c[p - 1]).abs());
    }
    best
}
