//! Evaluated error bounds of the d-CDP and modified d-CDP operators.

use nalgebra::DMatrix;
use serde::Serialize;

use super::dual::{DualGridY, DualGridZ};
use crate::conjugate::slope_range;
use crate::grid::{diam_box, diam_grid, dist_point_to_grid, hausdorff_points_to_grid, one_sided_hausdorff, GridFn};
use crate::problem::{ControlProblem, DiscretizationPlan};
use crate::{Error, Result};

/// `e1` (or `e1^m`) per state-grid point, `e2`, and `e3` for the modified operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    pub e1: GridFn,
    pub e2: f64,
    pub e3: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    e1_max: f64,
    e2: f64,
    e3: Option<f64>,
}

impl ErrorBudget {
    pub fn e1_max(&self) -> f64 {
        self.e1.values().iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary { e1_max: self.e1_max(), e2: self.e2, e3: self.e3 })?)
    }
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_proxy(slope_proxy: &[Vec<f64>], plan: &DiscretizationPlan, n: usize) -> Result<()> {
    if slope_proxy.len() != plan.state_grid.len() {
        return Err(Error::DimensionMismatch { expected: plan.state_grid.len(), got: slope_proxy.len() });
    }
    if let Some(bad) = slope_proxy.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    Ok(())
}

/// `[diam(Y) + Lip(J)] · dish(X, Xᵍ)` with `Lip(J)` from the slope range.
fn e2(problem: &ControlProblem, plan: &DiscretizationPlan, y: &DualGridY, j: &GridFn) -> f64 {
    let lip = slope_range(j).lipschitz();
    (diam_grid(&y.grid) + lip) * one_sided_hausdorff(problem.state_box(), &plan.state_grid)
}

fn e1_with(
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    y: &DualGridY,
    slope_proxy: &[Vec<f64>],
    input_norm: impl Fn(&[f64]) -> f64,
) -> Result<GridFn> {
    let n = problem.n();
    check_proxy(slope_proxy, plan, n)?;
    let du = diam_box(problem.input_box());
    let dx = diam_box(problem.state_box());
    let mut fs = vec![0.0; n];
    let mut out = Vec::with_capacity(plan.state_grid.len());
    for (x, s) in plan.state_grid.points().zip(slope_proxy) {
        problem.f_s(&x, &mut fs);
        let scale = norm(&fs) + input_norm(&x) * du + dx;
        out.push(scale * dist_point_to_grid(s, &y.grid));
    }
    GridFn::new(plan.state_grid.clone(), out)
}

/// Bounds of the d-CDP operator: `−e2 ≤ T[J](x) − T̂[J](x) ≤ e1(x)`.
///
/// `slope_proxy[i]` stands in for an optimal dual point at the `i`-th
/// state-grid point, a subgradient at `f_s(x)` of
/// `z ↦ min_u {C(x, u) + J(z + f_i(x) u)}`. It equals a slope of `T[J]`
/// only when `f_s` is the identity and the cost does not depend on `x`.
pub fn error_budget_alg1(
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    y: &DualGridY,
    j: &GridFn,
    slope_proxy: &[Vec<f64>],
) -> Result<ErrorBudget> {
    let e1 = e1_with(problem, plan, y, slope_proxy, |x| spectral_norm(&problem.f_i(x)))?;
    Ok(ErrorBudget { e1, e2: e2(problem, plan, y, j), e3: None })
}

/// Bounds of the modified d-CDP operator:
/// `−(e2 + e3) ≤ T[J](x) − T̂_m[J](x) ≤ e1^m(x)`.
///
/// `slope_proxy[i]` stands in for an optimal dual point at the `i`-th
/// state-grid point, a subgradient at `f_s(x)` of
/// `z ↦ min_u {C_i(u) + J(z + B u)}`.
pub fn error_budget_alg2(
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    y: &DualGridY,
    z: &DualGridZ,
    j: &GridFn,
    slope_proxy: &[Vec<f64>],
) -> Result<ErrorBudget> {
    let b = problem.input_matrix().ok_or_else(|| Error::Unsupported {
        algorithm: "cdp2".into(),
        reason: "input dynamics must be state independent".into(),
    })?;
    let nb = spectral_norm(b);
    let e1 = e1_with(problem, plan, y, slope_proxy, |_| nb)?;
    let n = problem.n();
    let mut images = Vec::with_capacity(plan.state_grid.len() * n);
    let mut fs = vec![0.0; n];
    for x in plan.state_grid.points() {
        problem.f_s(&x, &mut fs);
        images.extend_from_slice(&fs);
    }
    let e3 = diam_grid(&y.grid) * hausdorff_points_to_grid(images.chunks_exact(n), &z.grid);
    Ok(ErrorBudget { e1, e2: e2(problem, plan, y, j), e3: Some(e3) })
}
