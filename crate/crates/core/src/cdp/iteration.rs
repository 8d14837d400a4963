//! Multistep value iteration over the horizon.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::dual::{construct_y_with_range, construct_z, stage_cost_range};
use super::operator::{cdp1_step, cdp2_step, expectation_filter};
use super::stage::StageConjugate;
use crate::grid::io::{write_csv, write_json};
use crate::grid::GridFn;
use crate::problem::{ddp_step, ddp_step_stochastic, ControlProblem, DiscretizationPlan, Policy};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ddp,
    Cdp1,
    Cdp2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ddp, Algorithm::Cdp1, Algorithm::Cdp2];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ddp => "ddp",
            Algorithm::Cdp1 => "cdp1",
            Algorithm::Cdp2 => "cdp2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ddp" => Ok(Algorithm::Ddp),
            "cdp1" => Ok(Algorithm::Cdp1),
            "cdp2" => Ok(Algorithm::Cdp2),
            other => Err(Error::Config(format!("unknown algorithm '{other}' (expected ddp, cdp1 or cdp2)"))),
        }
    }
}

/// Costs-to-go for `t = 0..=T` plus timing.
#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub algorithm: Algorithm,
    /// `costs[t]` is the cost-to-go at time `t`; `costs[T]` is the terminal cost.
    pub costs: Vec<GridFn>,
    /// d-DP control laws for `t = 0..T`; `None` for the conjugate algorithms.
    pub policies: Option<Vec<Policy>>,
    /// Wall time of each backward step in seconds, in execution order (t = T−1 first).
    pub step_times: Vec<f64>,
    /// Wall time of the one-off setup (dual grids, conjugate tables).
    pub setup_time: f64,
}

#[derive(Serialize)]
struct Timing<'a> {
    algorithm: &'a str,
    setup_time: f64,
    step_times: &'a [f64],
    total_time: f64,
}

impl ValueIterationResult {
    pub fn horizon(&self) -> usize {
        self.costs.len() - 1
    }

    /// Setup plus all backward steps.
    pub fn total_time(&self) -> f64 {
        self.setup_time + self.step_times.iter().sum::<f64>()
    }

    /// Writes `J_<t>.csv`, `J_<t>.json` and `timing.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (t, j) in self.costs.iter().enumerate() {
            write_csv(j, BufWriter::new(File::create(dir.join(format!("J_{t}.csv")))?))?;
            write_json(j, BufWriter::new(File::create(dir.join(format!("J_{t}.json")))?))?;
        }
        let timing = Timing {
            algorithm: self.algorithm.as_str(),
            setup_time: self.setup_time,
            step_times: &self.step_times,
            total_time: self.total_time(),
        };
        std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&timing)?)?;
        Ok(())
    }
}

/// Terminal cost sampled on the state grid.
pub fn terminal_grid_fn(problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<GridFn> {
    GridFn::from_fn(plan.state_grid.clone(), |x| problem.terminal_cost(x))
}

/// Backward value iteration with the chosen operator.
///
/// With a disturbance, d-DP takes the expectation inside the minimization
/// and the conjugate algorithms pass `J` through the expectation filter
/// before each step. `Y` is rebuilt from the (filtered) cost-to-go every
/// step; `V`, the stage conjugate tables and `Z` are built once.
pub fn value_iteration(
    problem: &ControlProblem,
    plan: &DiscretizationPlan,
    algorithm: Algorithm,
) -> Result<ValueIterationResult> {
    plan.validate(problem)?;
    if algorithm == Algorithm::Cdp2 && !problem.is_separable() {
        return Err(Error::Unsupported {
            algorithm: "cdp2".into(),
            reason: format!("problem '{}' does not have a separable stage cost", problem.name()),
        });
    }
    let t_horizon = problem.horizon();
    let setup = Instant::now();
    let mut costs = vec![terminal_grid_fn(problem, plan)?];
    let mut policies = Vec::new();
    let mut step_times = Vec::with_capacity(t_horizon);

    let (stage, c_range, z) = match algorithm {
        Algorithm::Ddp => (None, None, None),
        Algorithm::Cdp1 | Algorithm::Cdp2 => {
            let stage = StageConjugate::prepare(problem, plan)?;
            let range = stage_cost_range(problem, plan)?;
            let z = if algorithm == Algorithm::Cdp2 { Some(construct_z(problem, plan)?) } else { None };
            (Some(stage), Some(range), z)
        }
    };
    let setup_time = setup.elapsed().as_secs_f64();
    info!("{algorithm}: setup {setup_time:.3}s, horizon {t_horizon}, |X| = {}", plan.state_grid.len());

    for t in (0..t_horizon).rev() {
        let start = Instant::now();
        let j = costs.last().expect("terminal cost present");
        let next = match algorithm {
            Algorithm::Ddp => {
                let (jn, pol) = match problem.disturbance() {
                    Some(_) => ddp_step_stochastic(j, problem, plan)?,
                    None => ddp_step(j, problem, plan)?,
                };
                policies.push(pol);
                jn
            }
            Algorithm::Cdp1 | Algorithm::Cdp2 => {
                let filtered = match problem.disturbance() {
                    Some(w) => expectation_filter(j, w)?,
                    None => j.clone(),
                };
                let y = construct_y_with_range(&filtered, c_range.unwrap(), plan)?;
                let stage = stage.as_ref().unwrap();
                if algorithm == Algorithm::Cdp1 {
                    cdp1_step(&filtered, problem, plan, &y, stage)?
                } else {
                    cdp2_step(&filtered, problem, plan, &y, z.as_ref().unwrap(), stage)?
                }
            }
        };
        let dt = start.elapsed().as_secs_f64();
        debug!("{algorithm}: t = {t} in {dt:.4}s");
        step_times.push(dt);
        costs.push(next);
    }
    costs.reverse();
    policies.reverse();
    Ok(ValueIterationResult {
        algorithm,
        costs,
        policies: (algorithm == Algorithm::Ddp).then_some(policies),
        step_times,
        setup_time,
    })
}
