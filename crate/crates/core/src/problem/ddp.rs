use rayon::prelude::*;

use super::{ControlProblem, DiscretizationPlan, Disturbance};
use crate::grid::{Grid, GridFn};
use crate::{Error, Result};

/// Control law on the state grid: one [`GridFn`] per input component.
/// States without a feasible input hold `+∞` in every component.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub components: Vec<GridFn>,
}

impl Policy {
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    /// LERP of every component at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.lerp(x)).collect()
    }
}

/// One step of discrete DP: for each `x` in the state grid, the minimum over
/// the input grid of `C(x, u) + J(f(x, u))`, with `J` extended by LERP.
///
/// Inputs with infinite cost or with `f(x, u)` outside the state box are
/// skipped. Ties keep the lowest input index.
pub fn ddp_step(
    j_next: &GridFn,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
) -> Result<(GridFn, Policy)> {
    ddp_core(j_next, problem, plan, None)
}

/// Stochastic variant: the extended `J` is averaged over the disturbance
/// before minimization.
pub fn ddp_step_stochastic(
    j_next: &GridFn,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
) -> Result<(GridFn, Policy)> {
    let w = problem
        .disturbance()
        .ok_or_else(|| Error::InvalidProblem("stochastic step needs a disturbance".into()))?;
    ddp_core(j_next, problem, plan, Some(w))
}

/// `E_w J(z + w)` with `+∞` propagation. Summation starts from zero so a
/// point mass at the origin reproduces `J(z)` exactly.
#[inline]
pub(crate) fn expected_lerp(j: &GridFn, z: &[f64], w: &Disturbance, buf: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for (wk, &p) in w.support().iter().zip(w.pmf()) {
        if p == 0.0 {
            continue;
        }
        for d in 0..z.len() {
            buf[d] = z[d] + wk[d];
        }
        let v = j.lerp(buf);
        if v == f64::INFINITY {
            return f64::INFINITY;
        }
        acc += p * v;
    }
    acc
}

fn ddp_core(
    j_next: &GridFn,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    dist: Option<&Disturbance>,
) -> Result<(GridFn, Policy)> {
    let (n, m) = (problem.n(), problem.m());
    if j_next.grid().dims() != n {
        return Err(Error::DimensionMismatch { expected: n, got: j_next.grid().dims() });
    }
    let xs = &plan.state_grid;
    let ug = &plan.input_grid;
    let us: Vec<f64> = ug.points().flatten().collect();
    let nu = ug.len();
    let input_costs: Option<Vec<f64>> = problem
        .input_cost(&us[..m])
        .map(|_| (0..nu).map(|k| problem.input_cost(&us[k * m..(k + 1) * m]).unwrap()).collect());
    let const_b: Option<Vec<f64>> = problem
        .input_matrix()
        .map(|b| (0..n).flat_map(|i| (0..m).map(move |j| b[(i, j)])).collect());
    let state_box = problem.state_box();

    let best: Vec<(f64, usize)> = (0..xs.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n * m]),
            |(x, fs, next, fi), i| {
                xs.point_into(i, x);
                problem.f_s(x, fs);
                match &const_b {
                    Some(b) => fi.copy_from_slice(b),
                    None => {
                        let mat = problem.f_i(x);
                        for r in 0..n {
                            for c in 0..m {
                                fi[r * m + c] = mat[(r, c)];
                            }
                        }
                    }
                }
                let cs = problem.state_cost(x);
                let mut buf = vec![0.0; n];
                let mut best = (f64::INFINITY, usize::MAX);
                for k in 0..nu {
                    let u = &us[k * m..(k + 1) * m];
                    let c = match (&input_costs, cs) {
                        (Some(ci), Some(cs)) => cs + ci[k],
                        _ => problem.stage_cost(x, u),
                    };
                    if !c.is_finite() {
                        continue;
                    }
                    for r in 0..n {
                        let mut s = 0.0;
                        for (cidx, uc) in u.iter().enumerate() {
                            s += fi[r * m + cidx] * uc;
                        }
                        next[r] = fs[r] + s;
                    }
                    if !state_box.contains(next) {
                        continue;
                    }
                    let v = match dist {
                        None => j_next.lerp(next),
                        Some(w) => expected_lerp(j_next, next, w, &mut buf),
                    };
                    let total = c + v;
                    if total < best.0 {
                        best = (total, k);
                    }
                }
                best
            },
        )
        .collect();

    let values: Vec<f64> = best.iter().map(|b| b.0).collect();
    let components = (0..m)
        .map(|c| {
            let vals = best
                .iter()
                .map(|&(v, k)| if v.is_finite() { us[k * m + c] } else { f64::INFINITY })
                .collect();
            GridFn::from_parts_unchecked(xs.clone(), vals)
        })
        .collect();
    Ok((GridFn::from_parts_unchecked(xs.clone(), values), Policy { components }))
}
