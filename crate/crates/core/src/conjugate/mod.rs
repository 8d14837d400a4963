//! Legendre-Fenchel machinery on grids: the linear-time Legendre transform,
//! a brute-force oracle, slope ranges, LERP-based approximate conjugation and
//! the conjugation error bounds.

mod llt;

pub use llt::{llt_1d, llt_nd};
pub(crate) use llt::llt_values;

use log::warn;

use crate::grid::{Grid, GridFn};
use crate::{Error, Result};

/// Discrete conjugate table on a dual grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateResult {
    pub dual_grid: Grid,
    pub values: GridFn,
}

/// Per-dimension minimal and maximal slopes of a discrete function.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Dimensions with fewer than two finite collinear points; their range is
    /// reported as `(0, 0)`.
    pub degenerate: Vec<bool>,
}

impl SlopeBox {
    /// Per-dimension `max(|lip⁻|, |lip⁺|)`.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| a.abs().max(b.abs())).collect()
    }

    /// Euclidean norm of [`SlopeBox::magnitudes`], used as a Lipschitz proxy.
    pub fn lipschitz(&self) -> f64 {
        self.magnitudes().iter().map(|m| m * m).sum::<f64>().sqrt()
    }
}

/// Ingredients of the conjugation error terms for a single dual point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjBoundInputs {
    pub y: Vec<f64>,
    pub lipschitz_h: f64,
    pub hausdorff_primal: f64,
    pub diam_primal: f64,
    pub dist_dual: f64,
}

impl ConjBoundInputs {
    /// Under-approximation bound of discrete against continuous conjugation.
    pub fn e_tilde_2(&self) -> f64 {
        bound_e_tilde_2(&self.y, self.lipschitz_h, self.hausdorff_primal)
    }

    /// Over-approximation bound of LERP conjugation.
    pub fn lerp_gap(&self) -> f64 {
        bound_lerp_conj(self.diam_primal, self.dist_dual)
    }
}

/// `max_{x ∈ grid} { ⟨y, x⟩ − f(x) }` by enumeration.
pub fn brute_conjugate(f: &GridFn, y: &[f64]) -> Result<f64> {
    let g = f.grid();
    if y.len() != g.dims() {
        return Err(Error::DimensionMismatch { expected: g.dims(), got: y.len() });
    }
    if !f.has_finite_support() {
        return Err(Error::EmptyDomain);
    }
    let mut x = vec![0.0; g.dims()];
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in f.values().iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        g.point_into(i, &mut x);
        let s: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        best = best.max(s - v);
    }
    Ok(best)
}

/// Slope range of `f` along each axis.
///
/// For dimension `i`, the lower end is the minimum over all axis-`i` lines of
/// the first finite forward difference, the upper end the maximum of the last
/// finite backward difference. Differences touching `+∞` are skipped.
pub fn slope_range(f: &GridFn) -> SlopeBox {
    let g = f.grid();
    let n = g.dims();
    let shape = g.shape();
    let v = f.values();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut degenerate = vec![false; n];
    for d in 0..n {
        let c = g.axis(d);
        let stride = g.strides()[d];
        let outer: usize = shape[..d].iter().product();
        let len = shape[d];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for o in 0..outer {
            for i in 0..stride {
                let base = o * len * stride + i;
                let at = |k: usize| v[base + k * stride];
                let first = (0..len - 1).find(|&k| at(k).is_finite() && at(k + 1).is_finite());
                let last = (0..len - 1).rev().find(|&k| at(k).is_finite() && at(k + 1).is_finite());
                if let (Some(a), Some(b)) = (first, last) {
                    lo = lo.min((at(a + 1) - at(a)) / (c[a + 1] - c[a]));
                    hi = hi.max((at(b + 1) - at(b)) / (c[b + 1] - c[b]));
                }
            }
        }
        if lo.is_finite() && hi.is_finite() {
            lower[d] = lo;
            upper[d] = hi;
        } else {
            warn!("slope range: dimension {d} has no two adjacent finite points");
            degenerate[d] = true;
        }
    }
    SlopeBox { lower, upper, degenerate }
}

/// LERP of a conjugate table: an over-approximation of the discrete
/// conjugate at `y`.
pub fn approx_conjugate(conj: &ConjugateResult, y: &[f64]) -> Result<f64> {
    conj.values.lerp_eval(y)
}

/// `(‖y‖ + lip_h) · dish_primal`.
pub fn bound_e_tilde_2(y: &[f64], lip_h: f64, dish_primal: f64) -> f64 {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm + lip_h) * dish_primal
}

/// `diam_primal · dist_dual`.
pub fn bound_lerp_conj(diam_primal: f64, dist_dual: f64) -> f64 {
    diam_primal * dist_dual
}
