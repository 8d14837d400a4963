//! Forward rollouts: control sequences and realized trajectory costs from
//! computed costs-to-go or d-DP control laws.

use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cdp::ValueIterationResult;
use crate::problem::{expected_lerp, ControlProblem, DiscretizationPlan, Disturbance, Policy};
use crate::{Error, Result};

/// A realized state/input trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryResult {
    /// `T + 1` states, fewer when truncated.
    pub states: Vec<Vec<f64>>,
    /// One input per transition.
    pub inputs: Vec<Vec<f64>>,
    /// `C(x_t, u_t)` per transition.
    pub stage_costs: Vec<f64>,
    /// `C_T(x_T)`, or `+∞` when truncated.
    pub terminal_cost: f64,
    /// `Σ C(x_t, u_t) + C_T(x_T)`, or `+∞` when truncated.
    pub cost: f64,
    /// Disturbance draws, one per transition, when the problem is stochastic.
    pub disturbances: Option<Vec<Vec<f64>>>,
    /// No admissible input was found at some step.
    pub infeasible: bool,
    /// Some realized state lies outside the state box.
    pub left_box: bool,
}

impl TrajectoryResult {
    /// CSV with columns `t, x_0.., u_0.., stage_cost`; the last row carries
    /// the terminal cost and empty inputs.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let m = self.inputs.first().map_or(0, Vec::len);
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..m).map(|i| format!("u{i}")));
        header.push("stage_cost".into());
        wr.write_record(&header)?;
        for (t, x) in self.states.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            match (self.inputs.get(t), self.stage_costs.get(t)) {
                (Some(u), Some(c)) => {
                    row.extend(u.iter().map(|v| v.to_string()));
                    row.push(c.to_string());
                }
                _ => {
                    row.extend((0..m).map(|_| String::new()));
                    row.push(self.terminal_cost.to_string());
                }
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `Σ C(x_t, u_t) + C_T(x_T)` recomputed from a trajectory.
pub fn evaluate_trajectory(problem: &ControlProblem, states: &[Vec<f64>], inputs: &[Vec<f64>]) -> Result<f64> {
    if states.len() != inputs.len() + 1 {
        return Err(Error::DimensionMismatch { expected: inputs.len() + 1, got: states.len() });
    }
    let (n, m) = (problem.n(), problem.m());
    if let Some(x) = states.iter().find(|x| x.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if let Some(u) = inputs.iter().find(|u| u.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: u.len() });
    }
    let mut total = 0.0;
    for (x, u) in states.iter().zip(inputs) {
        total += problem.stage_cost(x, u);
    }
    Ok(total + problem.terminal_cost(states.last().unwrap()))
}

/// Inverse-CDF draw from a finite distribution.
fn draw<'a>(w: &'a Disturbance, rng: &mut ChaCha8Rng) -> &'a [f64] {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (s, &p) in w.support().iter().zip(w.pmf()) {
        acc += p;
        if r < acc {
            return s;
        }
    }
    // rounding left the cumulative sum just below one
    let last = w.pmf().iter().rposition(|&p| p > 0.0).unwrap_or(w.len() - 1);
    &w.support()[last]
}

fn check_x0(problem: &ControlProblem, x0: &[f64]) -> Result<()> {
    if x0.len() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), got: x0.len() });
    }
    if x0.iter().any(|v| v.is_nan()) {
        return Err(Error::NanCoordinate);
    }
    if !problem.state_box().contains(x0) {
        warn!("rollout: initial state {x0:?} is outside the state box");
    }
    Ok(())
}

/// Shared forward loop; `choose` returns the input at `(t, x)` or `None`.
fn rollout_with(
    problem: &ControlProblem,
    x0: &[f64],
    seed: u64,
    mut choose: impl FnMut(usize, &[f64]) -> Option<Vec<f64>>,
) -> Result<TrajectoryResult> {
    check_x0(problem, x0)?;
    let horizon = problem.horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = problem.disturbance();
    let mut states = vec![x0.to_vec()];
    let mut inputs = Vec::with_capacity(horizon);
    let mut stage_costs = Vec::with_capacity(horizon);
    let mut draws = dist.map(|_| Vec::with_capacity(horizon));
    let mut left_box = !problem.state_box().contains(x0);
    let mut infeasible = false;
    for t in 0..horizon {
        let x = states.last().unwrap().clone();
        let Some(u) = choose(t, &x) else {
            infeasible = true;
            break;
        };
        let c = problem.stage_cost(&x, &u);
        if !c.is_finite() {
            infeasible = true;
            break;
        }
        let mut next = vec![0.0; problem.n()];
        problem.next_state(&x, &u, &mut next);
        if let (Some(w), Some(d)) = (dist, draws.as_mut()) {
            let wk = draw(w, &mut rng);
            for (a, b) in next.iter_mut().zip(wk) {
                *a += b;
            }
            d.push(wk.to_vec());
        }
        left_box |= !problem.state_box().contains(&next);
        inputs.push(u);
        stage_costs.push(c);
        states.push(next);
    }
    let (terminal_cost, cost) = if infeasible {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (problem.terminal_cost(states.last().unwrap()), evaluate_trajectory(problem, &states, &inputs)?)
    };
    Ok(TrajectoryResult {
        states,
        inputs,
        stage_costs,
        terminal_cost,
        cost,
        disturbances: draws,
        infeasible,
        left_box,
    })
}

/// Greedy rollout with respect to computed costs-to-go:
///
/// `u_t ∈ argmin_{u ∈ Uᵍ} C(x_t, u) + J_{t+1}(f(x_t, u))`
///
/// with `J_{t+1}` extended by LERP and averaged over the disturbance when
/// present. Inputs whose nominal successor leaves the state box are
/// skipped; ties keep the lowest input index. The disturbance is drawn after
/// `u_t` is chosen.
pub fn rollout_greedy(
    costs: &ValueIterationResult,
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    x0: &[f64],
    seed: u64,
) -> Result<TrajectoryResult> {
    if costs.horizon() != problem.horizon() {
        return Err(Error::Config(format!(
            "costs cover {} steps but the problem horizon is {}",
            costs.horizon(),
            problem.horizon()
        )));
    }
    let n = problem.n();
    let us: Vec<Vec<f64>> = plan.input_grid.points().collect();
    let dist = problem.disturbance();
    let mut next = vec![0.0; n];
    let mut buf = vec![0.0; n];
    rollout_with(problem, x0, seed, |t, x| {
        let j = &costs.costs[t + 1];
        let mut best = (f64::INFINITY, None);
        for (k, u) in us.iter().enumerate() {
            let c = problem.stage_cost(x, u);
            if !c.is_finite() {
                continue;
            }
            problem.next_state(x, u, &mut next);
            if !problem.state_box().contains(&next) {
                continue;
            }
            let v = match dist {
                Some(w) => expected_lerp(j, &next, w, &mut buf),
                None => j.lerp(&next),
            };
            if c + v < best.0 {
                best = (c + v, Some(k));
            }
        }
        best.1.map(|k| us[k].clone())
    })
}

/// Rollout of d-DP control laws: `u_t = LERP[μ_t](x_t)` clamped to the
/// input box.
pub fn rollout_policy(policies: &[Policy], problem: &ControlProblem, x0: &[f64], seed: u64) -> Result<TrajectoryResult> {
    if policies.len() != problem.horizon() {
        return Err(Error::Config(format!(
            "{} control laws for a horizon of {}",
            policies.len(),
            problem.horizon()
        )));
    }
    rollout_with(problem, x0, seed, |t, x| {
        let mut u = policies[t].eval(x);
        if u.iter().any(|v| !v.is_finite()) {
            return None;
        }
        problem.input_box().clamp(&mut u);
        Some(u)
    })
}
