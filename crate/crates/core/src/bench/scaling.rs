//! Runtime scaling of the backward iteration.

use serde::Serialize;

use crate::cdp::{value_iteration, Algorithm};
use crate::problem::{ControlProblem, DiscretizationPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingResult {
    pub algorithm: Algorithm,
    /// Points per dimension.
    pub ns: Vec<usize>,
    /// State-grid sizes `X = N^n`.
    pub sizes: Vec<usize>,
    /// Minimum backward time over the repeats, seconds.
    pub times: Vec<f64>,
    /// Least-squares slope of `log(time)` against `log(X)`.
    pub slope: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Backward iteration times for each `N` (state and input grids with `N`
/// points per dimension), single threaded, best of `repeats`.
pub fn scaling_study(
    problem: &ControlProblem,
    algorithm: Algorithm,
    ns: &[usize],
    repeats: usize,
) -> Result<ScalingResult> {
    if ns.len() < 4 {
        return Err(Error::Config("scaling study needs at least 4 grid sizes".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut times = Vec::with_capacity(ns.len());
    let mut sizes = Vec::with_capacity(ns.len());
    for &n in ns {
        let plan = DiscretizationPlan::uniform(problem, n, n)?;
        sizes.push(plan.state_grid.len());
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let r = pool.install(|| value_iteration(problem, &plan, algorithm))?;
            best = best.min(r.total_time());
        }
        times.push(best);
    }
    let lx: Vec<f64> = sizes.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let slope = fit_slope(&lx, &ly);
    Ok(ScalingResult { algorithm, ns: ns.to_vec(), sizes, times, slope })
}
