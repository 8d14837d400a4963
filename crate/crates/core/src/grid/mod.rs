//! Rectangular grids in ℝⁿ, discrete functions on them and the multilinear
//! interpolation/extrapolation (LERP) extension.
//!
//! Values are stored row-major with dimension 0 varying slowest.

mod function;
mod geometry;
pub mod io;

pub use function::GridFn;
pub use geometry::{
    diam_box, diam_grid, dist_point_to_grid, hausdorff_points_to_grid, one_sided_hausdorff, BoxSet,
};

use crate::{Error, Result};

/// Relative tolerance used to flag a dimension as uniformly spaced.
const UNIFORM_RTOL: f64 = 1e-12;

/// A Cartesian product of strictly increasing coordinate vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    coords: Vec<Vec<f64>>,
    uniform: Vec<bool>,
    strides: Vec<usize>,
    len: usize,
}

/// Position of a query point relative to a grid: the bracketing cell per
/// dimension and the affine coordinate inside it.
///
/// Weights lie in `[0, 1]` inside the convex hull of the grid and outside
/// that range when the point is extrapolated from a boundary cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLocation {
    pub cell_index: Vec<usize>,
    pub weights: Vec<f64>,
}

impl CellLocation {
    /// Rebuild the query point from the cell corners and weights.
    pub fn reconstruct(&self, grid: &Grid) -> Vec<f64> {
        self.cell_index
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(d, (&k, &w))| {
                let c = &grid.coords[d];
                c[k] + w * (c[k + 1] - c[k])
            })
            .collect()
    }
}

impl Grid {
    /// Build a grid from per-dimension coordinates.
    ///
    /// Every dimension needs at least two finite, strictly increasing
    /// coordinates.
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one dimension".into()));
        }
        for (d, c) in coords.iter().enumerate() {
            if c.len() < 2 {
                return Err(Error::InvalidGrid(format!(
                    "dimension {d} has {} points, need at least 2",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!("dimension {d} has non-finite coordinates")));
            }
            if c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!(
                    "dimension {d} is not strictly increasing"
                )));
            }
        }
        let uniform = coords.iter().map(|c| is_uniform(c)).collect();
        let mut strides = vec![1; coords.len()];
        for d in (0..coords.len() - 1).rev() {
            strides[d] = strides[d + 1] * coords[d + 1].len();
        }
        let len = strides[0] * coords[0].len();
        Ok(Self { coords, uniform, strides, len })
    }

    /// Equally spaced grid with endpoints exactly `lo[i]` and `hi[i]`.
    pub fn uniform(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(Error::InvalidGrid(
                "lo, hi and counts must have the same length".into(),
            ));
        }
        let mut coords = Vec::with_capacity(lo.len());
        for d in 0..lo.len() {
            let (a, b, k) = (lo[d], hi[d], counts[d]);
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "dimension {d}: need finite lo < hi, got [{a}, {b}]"
                )));
            }
            if k < 2 {
                return Err(Error::InvalidGrid(format!(
                    "dimension {d}: need at least 2 points, got {k}"
                )));
            }
            let mut c: Vec<f64> = (0..k)
                .map(|i| a + (b - a) * (i as f64) / ((k - 1) as f64))
                .collect();
            c[0] = a;
            c[k - 1] = b;
            coords.push(c);
        }
        let mut grid = Self::new(coords)?;
        grid.uniform.iter_mut().for_each(|u| *u = true);
        Ok(grid)
    }

    pub fn dims(&self) -> usize {
        self.coords.len()
    }

    /// Cardinality: product of the per-dimension lengths.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.coords[d]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.coords.iter().map(Vec::len).collect()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn uniform_flags(&self) -> &[bool] {
        &self.uniform
    }

    pub fn lower(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c[0]).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c[c.len() - 1]).collect()
    }

    /// Axis-aligned bounding box, i.e. the convex hull of the grid.
    pub fn bounding_box(&self) -> BoxSet {
        BoxSet::new(self.lower(), self.upper()).expect("grid bounds are ordered")
    }

    /// Multi-index of a flat row-major index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for d in 0..self.dims() {
            idx[d] = flat / self.strides[d];
            flat %= self.strides[d];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinates of the grid point with flat index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims()];
        self.point_into(flat, &mut out);
        out
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for d in 0..self.dims() {
            let i = flat / self.strides[d];
            flat %= self.strides[d];
            out[d] = self.coords[d][i];
        }
    }

    /// All grid points in row-major order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    /// Locate a query point: bracketing cell and affine weights per dimension.
    ///
    /// A coordinate lying exactly on an interior grid plane belongs to the cell
    /// on its lower side (weight 1). Points outside the hull use the nearest
    /// boundary cell.
    pub fn locate(&self, x: &[f64]) -> Result<CellLocation> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: x.len() });
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::NanCoordinate);
        }
        let (cell_index, weights) = x
            .iter()
            .enumerate()
            .map(|(d, &v)| self.locate_axis(d, v))
            .unzip();
        Ok(CellLocation { cell_index, weights })
    }

    /// Cell and weight along a single axis; no validation.
    #[inline]
    pub(crate) fn locate_axis(&self, d: usize, x: f64) -> (usize, f64) {
        let c = &self.coords[d];
        let last_cell = c.len() - 2;
        let k = if self.uniform[d] {
            let h = (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
            let guess = ((x - c[0]) / h).floor();
            let mut k = if guess <= 0.0 {
                0
            } else if guess >= last_cell as f64 {
                last_cell
            } else {
                guess as usize
            };
            // correct rounding so that c[k] < x <= c[k+1] wherever possible
            while k > 0 && x <= c[k] {
                k -= 1;
            }
            while k < last_cell && x > c[k + 1] {
                k += 1;
            }
            k
        } else {
            let p = c.partition_point(|&v| v < x);
            p.saturating_sub(1).min(last_cell)
        };
        let t = (x - c[k]) / (c[k + 1] - c[k]);
        (k, t)
    }

    /// Sub-grid with the smallest and largest coordinate removed in every
    /// dimension.
    pub fn subgrid_interior(&self) -> Result<Grid> {
        let mut coords = Vec::with_capacity(self.dims());
        for (d, c) in self.coords.iter().enumerate() {
            if c.len() < 3 {
                return Err(Error::InvalidGrid(format!(
                    "interior sub-grid needs at least 3 points in dimension {d}, got {}",
                    c.len()
                )));
            }
            coords.push(c[1..c.len() - 1].to_vec());
        }
        // a single interior point per dimension is a degenerate but valid box
        Grid::new_allow_single(coords)
    }

    /// Like [`Grid::new`] but accepts single-point dimensions. Only used for
    /// interior sub-grids, which may collapse to one coordinate.
    fn new_allow_single(coords: Vec<Vec<f64>>) -> Result<Self> {
        for (d, c) in coords.iter().enumerate() {
            if c.is_empty() || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGrid(format!("dimension {d} is empty or unsorted")));
            }
        }
        let uniform = coords.iter().map(|c| c.len() < 3 || is_uniform(c)).collect();
        let mut strides = vec![1; coords.len()];
        for d in (0..coords.len() - 1).rev() {
            strides[d] = strides[d + 1] * coords[d + 1].len();
        }
        let len = strides[0] * coords[0].len();
        Ok(Self { coords, uniform, strides, len })
    }
}

/// Convenience wrapper matching the operation name used in the docs.
pub fn make_uniform_grid(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Grid> {
    Grid::uniform(lo, hi, counts)
}

fn is_uniform(c: &[f64]) -> bool {
    if c.len() < 3 {
        return true;
    }
    let h0 = c[1] - c[0];
    let scale = c.iter().fold(h0.abs(), |m, v| m.max(v.abs()));
    c.windows(2)
        .all(|w| ((w[1] - w[0]) - h0).abs() <= UNIFORM_RTOL * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints_and_spacing() {
        let g = Grid::uniform(&[0.0], &[1.0], &[3]).unwrap();
        assert_eq!(g.axis(0), &[0.0, 0.5, 1.0]);
        assert!(g.uniform_flags()[0]);

        let g = Grid::uniform(&[-1.0, -1.0], &[1.0, 1.0], &[21, 21]).unwrap();
        assert_eq!(g.len(), 441);
        assert_eq!(g.axis(1)[20], 1.0);
    }

    #[test]
    fn uniform_grid_rejects_bad_input() {
        assert!(Grid::uniform(&[0.0], &[1.0], &[1]).is_err());
        assert!(Grid::uniform(&[1.0], &[1.0], &[3]).is_err());
        assert!(Grid::uniform(&[2.0], &[1.0], &[3]).is_err());
    }

    #[test]
    fn new_rejects_unsorted() {
        assert!(Grid::new(vec![vec![0.0, 0.0, 1.0]]).is_err());
        assert!(Grid::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(!Grid::new(vec![vec![0.0, 0.1, 1.0]]).unwrap().uniform_flags()[0]);
    }

    #[test]
    fn locate_examples() {
        let g = Grid::new(vec![vec![0.0, 1.0]]).unwrap();
        let loc = g.locate(&[0.25]).unwrap();
        assert_eq!((loc.cell_index[0], loc.weights[0]), (0, 0.25));
        let loc = g.locate(&[2.0]).unwrap();
        assert_eq!((loc.cell_index[0], loc.weights[0]), (0, 2.0));

        let g = Grid::new(vec![vec![0.0, 0.5, 1.0]]).unwrap();
        let loc = g.locate(&[0.5]).unwrap();
        assert_eq!((loc.cell_index[0], loc.weights[0]), (0, 1.0));
        assert!(g.locate(&[f64::NAN]).is_err());
    }

    #[test]
    fn locate_tie_rule_nonuniform_matches_uniform() {
        let u = Grid::uniform(&[0.0], &[1.0], &[11]).unwrap();
        let nu = Grid::new_allow_single(u.coords.clone()).map(|mut g| {
            g.uniform[0] = false;
            g
        });
        let nu = nu.unwrap();
        for &x in u.axis(0).iter().chain([-0.3, 0.05, 0.999, 1.7].iter()) {
            assert_eq!(u.locate(&[x]).unwrap(), nu.locate(&[x]).unwrap(), "x={x}");
        }
    }

    #[test]
    fn subgrid_interior_examples() {
        let g = Grid::new(vec![vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(g.subgrid_interior().unwrap().axis(0), &[1.0]);
        let g = Grid::new(vec![vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let s = g.subgrid_interior().unwrap();
        assert_eq!(s.axis(0), &[1.0, 2.0]);
        assert_eq!(s.axis(1), &[1.0]);
        assert!(Grid::new(vec![vec![0.0, 1.0]]).unwrap().subgrid_interior().is_err());
    }

    #[test]
    fn flat_and_multi_index_are_row_major() {
        let g = Grid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(g.multi_index(4), vec![1, 1]);
        assert_eq!(g.flat_index(&[1, 2]), 5);
        assert_eq!(g.point(2), vec![0.0, 2.0]);
    }
}
