//! The d-CDP operators and the expectation filter.

use rayon::prelude::*;

use super::dual::{DualGridY, DualGridZ};
use super::stage::StageConjugate;
use crate::conjugate::llt_values;
use crate::grid::GridFn;
use crate::problem::{expected_lerp, ControlProblem, DiscretizationPlan, Disturbance};
use crate::{Error, Result};

fn check_j(j: &GridFn, problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<()> {
    if j.grid().dims() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), got: j.grid().dims() });
    }
    if j.grid() != &plan.state_grid {
        return Err(Error::InvalidGridFn("cost-to-go must live on the plan's state grid".into()));
    }
    if !j.has_finite_support() {
        return Err(Error::EmptyDomain);
    }
    Ok(())
}

/// One d-CDP step:
///
/// `T[J](x) = max_{y ∈ Y} { ⟨f_s(x), y⟩ − C_x*(−f_i(x)ᵀ y) − J*(y) }`
///
/// with `J*` the discrete conjugate of `J` on `Y`. Ties keep the lowest
/// dual index.
pub fn cdp1_step(
    j: &GridFn,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    y: &DualGridY,
    stage: &StageConjugate,
) -> Result<GridFn> {
    check_j(j, problem, plan)?;
    let (n, m) = (problem.n(), problem.m());
    let jstar = llt_values(j.grid(), j.values(), &y.grid);
    let ys: Vec<f64> = y.grid.points().flatten().collect();
    let xs = &plan.state_grid;
    let const_b = problem.input_matrix().cloned();
    let out: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; m]),
            |(x, fs, v), i| {
                xs.point_into(i, x);
                problem.f_s(x, fs);
                let fi = match &const_b {
                    Some(b) => b.clone(),
                    None => problem.f_i(x),
                };
                let mut best = f64::NEG_INFINITY;
                for (k, yk) in ys.chunks_exact(n).enumerate() {
                    for (c, vc) in v.iter_mut().enumerate() {
                        *vc = -(0..n).map(|r| fi[(r, c)] * yk[r]).sum::<f64>();
                    }
                    let phi = stage.joint(problem, i, x, v) + jstar[k];
                    let val = fs.iter().zip(yk).map(|(a, b)| a * b).sum::<f64>() - phi;
                    if val > best {
                        best = val;
                    }
                }
                best
            },
        )
        .collect();
    GridFn::new(xs.clone(), out)
}

/// `φ(y) = C_i*(−Bᵀ y) + J*(y)` on `Y`.
pub(crate) fn phi_on_y(
    j: &GridFn,
    problem: &ControlProblem,
    y: &DualGridY,
    stage: &StageConjugate,
) -> Result<Vec<f64>> {
    let b = problem.input_matrix().ok_or_else(|| Error::Unsupported {
        algorithm: "cdp2".into(),
        reason: "input dynamics must be state independent".into(),
    })?;
    let (n, m) = (problem.n(), problem.m());
    let jstar = llt_values(j.grid(), j.values(), &y.grid);
    let mut v = vec![0.0; m];
    let mut yk = vec![0.0; n];
    let mut phi = Vec::with_capacity(y.grid.len());
    for (k, js) in jstar.iter().enumerate() {
        y.grid.point_into(k, &mut yk);
        for (c, vc) in v.iter_mut().enumerate() {
            *vc = -(0..n).map(|r| b[(r, c)] * yk[r]).sum::<f64>();
        }
        phi.push(stage.input(problem, &v)? + js);
    }
    Ok(phi)
}

/// One modified d-CDP step:
///
/// `T_m[J](x) = C_s(x) + LERP[φ*](f_s(x))`
///
/// where `φ*` is the discrete conjugate on `Z` of
/// `φ(y) = C_i*(−Bᵀ y) + J*(y)` on `Y`.
pub fn cdp2_step(
    j: &GridFn,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    y: &DualGridY,
    z: &DualGridZ,
    stage: &StageConjugate,
) -> Result<GridFn> {
    check_j(j, problem, plan)?;
    if !problem.is_separable() {
        return Err(Error::Unsupported {
            algorithm: "cdp2".into(),
            reason: "stage cost must be separable".into(),
        });
    }
    let n = problem.n();
    let xs = &plan.state_grid;
    let zb = z.grid.bounding_box();
    let mut fs = vec![0.0; n];
    let mut images = Vec::with_capacity(xs.len() * n);
    for x in xs.points() {
        problem.f_s(&x, &mut fs);
        for d in 0..n {
            if fs[d] < zb.lo()[d] || fs[d] > zb.hi()[d] {
                return Err(Error::ZNotCovering { dim: d });
            }
        }
        images.extend_from_slice(&fs);
    }
    let phi = phi_on_y(j, problem, y, stage)?;
    let phistar = GridFn::from_parts_unchecked(z.grid.clone(), llt_values(&y.grid, &phi, &z.grid));
    let out: Vec<f64> = images
        .par_chunks_exact(n)
        .enumerate()
        .map_init(
            || vec![0.0; n],
            |x, (i, img)| {
                xs.point_into(i, x);
                problem.state_cost(x).unwrap() + phistar.lerp(img)
            },
        )
        .collect();
    GridFn::new(xs.clone(), out)
}

/// `x ↦ E_w J(x + w)` on the grid of `J`, with `J` extended by LERP.
pub fn expectation_filter(j: &GridFn, w: &Disturbance) -> Result<GridFn> {
    let g = j.grid();
    if w.dims() != g.dims() {
        return Err(Error::DimensionMismatch { expected: g.dims(), got: w.dims() });
    }
    let n = g.dims();
    let out: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(x, buf), i| {
                g.point_into(i, x);
                expected_lerp(j, x, w, buf)
            },
        )
        .collect();
    GridFn::new(g.clone(), out)
}
