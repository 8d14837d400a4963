use super::Grid;
use crate::{Error, Result};

/// Extended-real valued function sampled on a [`Grid`].
///
/// Entries are real or `+∞`; `NaN` and `-∞` are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGridFn(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
            return Err(Error::InvalidGridFn(format!("invalid entry {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Like [`GridFn::new`] but also requires a nonempty effective domain.
    pub fn proper(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let f = Self::new(grid, values)?;
        if !f.has_finite_support() {
            return Err(Error::EmptyDomain);
        }
        Ok(f)
    }

    /// Sample `h` at every grid point.
    pub fn from_fn(grid: Grid, mut h: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grid.dims()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                h(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn has_finite_support(&self) -> bool {
        self.values.iter().any(|v| v.is_finite())
    }

    /// Largest and smallest finite values, if any.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// Pointwise map producing a new function on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Multilinear interpolation inside the grid hull, multilinear
    /// extrapolation from the nearest boundary cell outside it.
    ///
    /// Exact at grid points. If any corner with a nonzero weight is `+∞`
    /// the result is `+∞`. The query must have `dims` finite coordinates.
    pub fn lerp(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.grid.dims());
        let n = self.grid.dims();
        match n {
            1 => self.lerp1(x[0]),
            2 => self.lerp2(x[0], x[1]),
            _ => self.lerp_n(x),
        }
    }

    #[inline]
    fn lerp1(&self, x: f64) -> f64 {
        let (k, t) = self.grid.locate_axis(0, x);
        combine(&[(1.0 - t, self.values[k]), (t, self.values[k + 1])])
    }

    #[inline]
    fn lerp2(&self, x0: f64, x1: f64) -> f64 {
        let (k0, t0) = self.grid.locate_axis(0, x0);
        let (k1, t1) = self.grid.locate_axis(1, x1);
        let s0 = self.grid.strides()[0];
        let base = k0 * s0 + k1;
        let v = &self.values;
        combine(&[
            ((1.0 - t0) * (1.0 - t1), v[base]),
            ((1.0 - t0) * t1, v[base + 1]),
            (t0 * (1.0 - t1), v[base + s0]),
            (t0 * t1, v[base + s0 + 1]),
        ])
    }

    fn lerp_n(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let strides = self.grid.strides();
        let mut base = 0;
        let mut ts = Vec::with_capacity(n);
        for (d, &xd) in x.iter().enumerate() {
            let (k, t) = self.grid.locate_axis(d, xd);
            base += k * strides[d];
            ts.push(t);
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = base;
            for d in 0..n {
                if mask >> (n - 1 - d) & 1 == 1 {
                    w *= ts[d];
                    idx += strides[d];
                } else {
                    w *= 1.0 - ts[d];
                }
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[idx];
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    /// Checked LERP evaluation: validates the query dimension and rejects NaN.
    pub fn lerp_eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.grid.dims() {
            return Err(Error::DimensionMismatch { expected: self.grid.dims(), got: x.len() });
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::NanCoordinate);
        }
        Ok(self.lerp(x))
    }
}

#[inline]
fn combine(terms: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for &(w, v) in terms {
        if w == 0.0 {
            continue;
        }
        if v == f64::INFINITY {
            return f64::INFINITY;
        }
        acc += w * v;
    }
    acc
}
