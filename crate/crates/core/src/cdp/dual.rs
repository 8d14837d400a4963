//! Construction of the dual grids Y (state dual), Z (image of the state
//! dynamics) and V (input dual).

use log::{debug, warn};

use crate::conjugate::{slope_range, SlopeBox};
use crate::grid::{BoxSet, Grid, GridFn};
use crate::problem::{ControlProblem, DiscretizationPlan, StageCost};
use crate::{Error, Result};

/// State-dual grid with the quantities used to size it.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGridY {
    pub grid: Grid,
    pub c_max: f64,
    pub c_min: f64,
    pub j_max: f64,
    pub j_min: f64,
    pub alpha: f64,
    /// Per-dimension half-width of the grid.
    pub half_widths: Vec<f64>,
}

/// Grid covering `f_s` of the state grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGridZ {
    pub grid: Grid,
    /// Unpadded bounding box of the image points.
    pub image_box: BoxSet,
}

/// Input-dual grid with the slope box it was built to cover.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGridV {
    pub grid: Grid,
    pub slopes: SlopeBox,
}

/// Extremes of the stage cost used to size Y.
///
/// Joint form: over state-grid × input-grid pairs with finite cost whose
/// successor stays in the state box (all finite pairs if there are none).
/// Separable form: the input cost over the input grid.
pub fn stage_cost_range(problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<(f64, f64)> {
    let us: Vec<Vec<f64>> = plan.input_grid.points().collect();
    let fold = |v: f64, acc: &mut Option<(f64, f64)>| {
        if v.is_finite() {
            *acc = Some(match *acc {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
    };
    match problem.stage_cost_form() {
        StageCost::Separable { .. } => {
            let mut acc = None;
            for u in &us {
                fold(problem.input_cost(u).unwrap_or(f64::INFINITY), &mut acc);
            }
            acc.ok_or(Error::EmptyDomain)
        }
        StageCost::Joint { .. } => {
            let (mut feasible, mut any) = (None, None);
            let mut next = vec![0.0; problem.n()];
            for x in plan.state_grid.points() {
                for u in &us {
                    let c = problem.stage_cost(&x, u);
                    fold(c, &mut any);
                    if c.is_finite() {
                        problem.next_state(&x, u, &mut next);
                        if problem.state_box().contains(&next) {
                            fold(c, &mut feasible);
                        }
                    }
                }
            }
            feasible.or(any).ok_or(Error::EmptyDomain)
        }
    }
}

/// Build Y from the current cost-to-go.
pub fn construct_y(j: &GridFn, problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<DualGridY> {
    let range = stage_cost_range(problem, plan)?;
    construct_y_with_range(j, range, plan)
}

/// [`construct_y`] with precomputed stage-cost extremes `(C^m, C^M)`.
///
/// Uniform and symmetric about 0 with per-dimension half-width
/// `α (C^M + J^M − C^m − J^m) / diam(X_i)`.
pub fn construct_y_with_range(
    j: &GridFn,
    (c_min, c_max): (f64, f64),
    plan: &DiscretizationPlan,
) -> Result<DualGridY> {
    let (j_min, j_max) = j.finite_range().ok_or(Error::EmptyDomain)?;
    let counts = plan.y_counts();
    let spread = c_max + j_max - c_min - j_min;
    let xs = &plan.state_grid;
    let mut half_widths = Vec::with_capacity(xs.dims());
    for d in 0..xs.dims() {
        let c = xs.axis(d);
        let h = plan.alpha * spread / (c[c.len() - 1] - c[0]);
        if h > 0.0 && h.is_finite() {
            half_widths.push(h);
        } else {
            warn!("Y construction: zero slope range in dimension {d}, using [-1, 1]");
            half_widths.push(1.0);
        }
    }
    let lo: Vec<f64> = half_widths.iter().map(|h| -h).collect();
    let grid = Grid::uniform(&lo, &half_widths, &counts)?;
    Ok(DualGridY { grid, c_max, c_min, j_max, j_min, alpha: plan.alpha, half_widths })
}

/// Relative padding applied to each side of the Z box.
const Z_PAD: f64 = 1e-9;

/// Uniform grid over the padded bounding box of `f_s(X)`.
pub fn construct_z(problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<DualGridZ> {
    let n = problem.n();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut fs = vec![0.0; n];
    for x in plan.state_grid.points() {
        problem.f_s(&x, &mut fs);
        for d in 0..n {
            lo[d] = lo[d].min(fs[d]);
            hi[d] = hi[d].max(fs[d]);
        }
    }
    let image_box = BoxSet::new(lo.clone(), hi.clone())?;
    for d in 0..n {
        if hi[d] - lo[d] <= Z_PAD * lo[d].abs().max(hi[d].abs()).max(1.0) {
            let c = 0.5 * (lo[d] + hi[d]);
            let w = c.abs().max(1.0) * 1e-6;
            warn!("Z construction: image is flat in dimension {d}, inflating to +-{w:e}");
            lo[d] = c - w;
            hi[d] = c + w;
        } else {
            lo[d] -= Z_PAD * lo[d].abs().max(1.0);
            hi[d] += Z_PAD * hi[d].abs().max(1.0);
        }
    }
    let grid = Grid::uniform(&lo, &hi, &plan.z_counts())?;
    Ok(DualGridZ { grid, image_box })
}

/// Relative tolerance below which a slope range counts as a single slope.
const SLOPE_RTOL: f64 = 1e-9;

/// Uniform grid whose interior sub-grid covers the slope box of `cost`.
///
/// Per dimension the range is `[lip⁻ − δ, lip⁺ + δ]` with `δ` one step of
/// the resulting grid. A flat or degenerate dimension gets a unit
/// half-width around its common slope.
pub fn construct_v(cost: &GridFn, counts: &[usize]) -> Result<DualGridV> {
    let slopes = slope_range(cost);
    let n = cost.grid().dims();
    if counts.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: counts.len() });
    }
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for d in 0..n {
        let (mut a, mut b) = (slopes.lower[d], slopes.upper[d]);
        let tol = SLOPE_RTOL * a.abs().max(b.abs()).max(1.0);
        if a > b {
            if a - b > tol {
                warn!("V construction: slopes decrease in dimension {d}; cost is not convex-extensible");
            }
            std::mem::swap(&mut a, &mut b);
        }
        let span = b - a;
        if slopes.degenerate[d] || span <= tol {
            if !slopes.degenerate[d] {
                debug!("V construction: cost is affine in dimension {d}, using unit half-width");
            }
            let c = 0.5 * (a + b);
            lo[d] = c - 1.0;
            hi[d] = c + 1.0;
        } else {
            let k = counts[d];
            let width = if k >= 4 { span * (k - 1) as f64 / (k - 3) as f64 } else { 3.0 * span };
            let delta = 0.5 * (width - span);
            lo[d] = a - delta;
            hi[d] = b + delta;
        }
    }
    let grid = Grid::uniform(&lo, &hi, counts)?;
    Ok(DualGridV { grid, slopes })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;
    use crate::problem::{preset, CostTerm, ProblemBuilder};

    fn line(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn::from_fn(Grid::new(vec![xs]).unwrap(), |x| f(x[0])).unwrap()
    }

    #[test]
    fn y_half_width_formula() {
        let p = preset("synthetic_separable").unwrap();
        let plan = DiscretizationPlan::uniform(&p, 5, 5).unwrap();
        // C_i ranges over [0, 2(e² − 1)] and J over [0, 2]
        let j = GridFn::from_fn(plan.state_grid.clone(), |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        let y = construct_y(&j, &p, &plan).unwrap();
        let expect = (2.0 * (2f64.exp() - 1.0) + 2.0) / 2.0;
        for d in 0..2 {
            assert!((y.half_widths[d] - expect).abs() < 1e-12);
            assert_eq!(y.grid.lower()[d], -y.half_widths[d]);
            assert_eq!(y.grid.upper()[d], y.half_widths[d]);
        }
        let y = construct_y_with_range(&j, (0.0, 2.0), &plan).unwrap();
        assert_eq!(y.half_widths, vec![2.0, 2.0]);
    }

    #[test]
    fn y_degenerate_falls_back_to_unit_box() {
        let p = preset("synthetic_separable").unwrap();
        let plan = DiscretizationPlan::uniform(&p, 3, 3).unwrap();
        let j = GridFn::from_fn(plan.state_grid.clone(), |_| 5.0).unwrap();
        let y = construct_y_with_range(&j, (1.0, 1.0), &plan).unwrap();
        assert_eq!(y.grid.lower(), vec![-1.0, -1.0]);
        assert_eq!(y.grid.upper(), vec![1.0, 1.0]);
    }

    #[test]
    fn v_affine_with_rounding_noise_gets_unit_half_width() {
        // slope 1 sampled at a large offset: differences carry rounding noise
        let f = line((0..9).map(|i| 0.1 * i as f64).collect(), |u| 2.3e4 + u);
        let v = construct_v(&f, &[7]).unwrap();
        assert!((v.grid.lower()[0] - 0.0).abs() < 1e-6);
        assert!((v.grid.upper()[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn sir_alpha_is_half() {
        let p = preset("sir").unwrap();
        let plan = DiscretizationPlan::uniform(&p, 5, 5).unwrap();
        assert_eq!(plan.alpha, 0.5);
    }

    #[test]
    fn z_covers_image() {
        let p = preset("synthetic_separable").unwrap();
        let plan = DiscretizationPlan::uniform(&p, 11, 3).unwrap();
        let z = construct_z(&p, &plan).unwrap();
        // A [-1,1]² has corners (±2.5, ±4)
        assert_eq!(z.image_box.lo(), &[-2.5, -4.0]);
        assert_eq!(z.image_box.hi(), &[2.5, 4.0]);
        assert!(z.grid.lower()[0] < -2.5 && z.grid.upper()[1] > 4.0);
        assert!(z.grid.upper()[1] < 4.0 + 1e-8);
    }

    #[test]
    fn z_identity_and_constant_maps() {
        let b = BoxSet::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mk = |a: DMatrix<f64>| {
            ProblemBuilder::new("t")
                .linear_state(a)
                .input_matrix(DMatrix::identity(2, 2))
                .separable_cost(CostTerm::squared_norm(2), CostTerm::squared_norm(2))
                .terminal_cost(CostTerm::squared_norm(2))
                .state_box(b.clone())
                .input_box(b.clone())
                .build()
                .unwrap()
        };
        let p = mk(DMatrix::identity(2, 2));
        let plan = DiscretizationPlan::uniform(&p, 5, 3).unwrap();
        let z = construct_z(&p, &plan).unwrap();
        assert_eq!(z.image_box, b);
        let p = mk(DMatrix::zeros(2, 2));
        let z = construct_z(&p, &plan).unwrap();
        assert_eq!(z.grid.lower(), vec![-1e-6, -1e-6]);
        assert_eq!(z.grid.upper(), vec![1e-6, 1e-6]);
    }

    #[test]
    fn v_strictly_covers_slopes() {
        let c = line(vec![-1.0, 0.0, 1.0], |u| u * u);
        let v = construct_v(&c, &[7]).unwrap();
        assert_eq!((v.slopes.lower[0], v.slopes.upper[0]), (-1.0, 1.0));
        let inner = v.grid.subgrid_interior().unwrap();
        assert!(inner.lower()[0] <= -1.0 + 1e-12 && inner.upper()[0] >= 1.0 - 1e-12);
        assert!(v.grid.lower()[0] < -1.0 && v.grid.upper()[0] > 1.0);

        let flat = line(vec![-1.0, 0.0, 1.0], |_| 3.0);
        let v = construct_v(&flat, &[5]).unwrap();
        assert_eq!((v.grid.lower()[0], v.grid.upper()[0]), (-1.0, 1.0));
    }

    #[test]
    fn v_for_expl1_on_21_points() {
        let xs: Vec<f64> = (0..21).map(|k| -2.0 + 0.2 * k as f64).collect();
        let c = line(xs, |u| u.abs().exp() - 1.0);
        let v = construct_v(&c, &[21]).unwrap();
        let e2 = 2f64.exp();
        assert!(v.slopes.lower[0] > -e2 && v.slopes.upper[0] < e2);
        let inner = v.grid.subgrid_interior().unwrap();
        assert!(inner.lower()[0] <= v.slopes.lower[0] + 1e-12);
        assert!(inner.upper()[0] >= v.slopes.upper[0] - 1e-12);
    }
}
