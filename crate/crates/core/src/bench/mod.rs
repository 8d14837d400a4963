//! Experiment runner: reference solutions, error curves, trajectory-cost
//! tables and runtime scaling.

mod reference;
mod scaling;

pub use reference::{make_reference, reference_key};
pub use scaling::{fit_slope, scaling_study, ScalingResult};

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cdp::{value_iteration, Algorithm, ValueIterationResult};
use crate::control::{rollout_greedy, rollout_policy, TrajectoryResult};
use crate::grid::io::ExtReal;
use crate::problem::{file::load_problem, preset, ControlProblem, DiscretizationPlan};
use crate::{Error, Result};

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemSource {
    Preset(String),
    File(PathBuf),
}

impl ProblemSource {
    pub fn load(&self) -> Result<ControlProblem> {
        match self {
            ProblemSource::Preset(name) => preset(name),
            ProblemSource::File(path) => load_problem(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub algorithms: Vec<Algorithm>,
    /// Points per dimension for the state and input grids.
    pub ns: Vec<usize>,
    pub horizon: Option<usize>,
    pub x0_count: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub alpha: Option<f64>,
    /// Points per dimension of Y, Z and V; `None` matches the primal grids.
    pub y_n: Option<usize>,
    pub z_n: Option<usize>,
    pub v_n: Option<usize>,
    pub reference_n: usize,
    pub numeric_conj: bool,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSource) -> Self {
        Self {
            problem,
            algorithms: vec![Algorithm::Ddp, Algorithm::Cdp2],
            ns: vec![11, 21],
            horizon: None,
            x0_count: 10,
            seed: 0,
            out_dir: None,
            alpha: None,
            y_n: None,
            z_n: None,
            v_n: None,
            reference_n: 41,
            numeric_conj: false,
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return Err(Error::Config("grid sizes must be a nonempty list of integers >= 2".into()));
        }
        if self.reference_n < 2 {
            return Err(Error::Config("reference grid size must be >= 2".into()));
        }
        if self.x0_count == 0 {
            return Err(Error::Config("x0 count must be positive".into()));
        }
        for (what, v) in [("Y", self.y_n), ("Z", self.z_n), ("V", self.v_n)] {
            if v.is_some_and(|k| k < 2) {
                return Err(Error::Config(format!("{what} size must be >= 2")));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config("alpha must be positive".into()));
            }
        }
        Ok(())
    }

    /// The problem with the horizon override applied.
    pub fn load_problem(&self) -> Result<ControlProblem> {
        let p = self.problem.load()?;
        match self.horizon {
            Some(t) => p.with_horizon(t),
            None => Ok(p),
        }
    }

    /// Uniform plan with `n` points per dimension and the dual overrides.
    pub fn plan(&self, problem: &ControlProblem, n: usize) -> Result<DiscretizationPlan> {
        let mut plan = DiscretizationPlan::uniform(problem, n, n)?;
        plan.y_counts = self.y_n.map(|k| vec![k; problem.n()]);
        plan.z_counts = self.z_n.map(|k| vec![k; problem.n()]);
        plan.v_counts = self.v_n.map(|k| vec![k; problem.m()]);
        if let Some(a) = self.alpha {
            plan.alpha = a;
        }
        plan.numeric_conj = self.numeric_conj;
        plan.validate(problem)?;
        Ok(plan)
    }
}

fn ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    ExtReal::from_f64(*v).serialize(s)
}

fn ext_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| ExtReal::from_f64(x)))
}

fn ext_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.map(ExtReal::from_f64).serialize(s)
}

/// One (algorithm, N) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub algorithm: Algorithm,
    pub n: usize,
    /// `max_x |J_t(x) − J_ref,t(x)|` for `t = 0..=T`.
    #[serde(serialize_with = "ext_vec")]
    pub error_curve: Vec<f64>,
    /// Mean over initial states of the greedy trajectory cost relative to the reference.
    #[serde(serialize_with = "ext")]
    pub rel_cost: f64,
    /// Same with the d-DP control laws (d-DP only).
    #[serde(serialize_with = "ext_opt")]
    pub rel_cost_policy: Option<f64>,
    pub backward_time: f64,
    /// Total rollout time over all initial states.
    pub forward_time: f64,
    pub infeasible_rollouts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub threads: usize,
    pub os: String,
    pub arch: String,
    pub version: String,
}

impl Environment {
    fn current() -> Self {
        Self {
            threads: rayon::current_num_threads(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub problem: String,
    pub horizon: usize,
    pub reference_n: usize,
    pub seed: u64,
    pub x0: Vec<Vec<f64>>,
    /// d-DP control-law rollout costs at the reference resolution.
    #[serde(serialize_with = "ext_vec")]
    pub reference_costs: Vec<f64>,
    /// Initial states whose reference rollout is infeasible; left out of the averages.
    pub excluded_x0: Vec<usize>,
    pub rows: Vec<ReportRow>,
    pub environment: Environment,
}

impl BenchmarkReport {
    pub fn row(&self, algorithm: Algorithm, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.n == n)
    }

    /// Writes `report.json`, `table.csv` and `error_curves.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("report.json"))?), self)?;
        let f = |v: f64| crate::grid::io::format_value(v);
        let mut t = csv::Writer::from_path(dir.join("table.csv"))?;
        t.write_record([
            "algorithm",
            "n",
            "rel_cost",
            "rel_cost_policy",
            "backward_time",
            "forward_time",
            "infeasible_rollouts",
        ])?;
        for r in &self.rows {
            t.write_record([
                r.algorithm.to_string(),
                r.n.to_string(),
                f(r.rel_cost),
                r.rel_cost_policy.map(f).unwrap_or_default(),
                f(r.backward_time),
                f(r.forward_time),
                r.infeasible_rollouts.to_string(),
            ])?;
        }
        t.flush()?;
        let mut e = csv::Writer::from_path(dir.join("error_curves.csv"))?;
        e.write_record(["algorithm", "n", "t", "max_abs_error"])?;
        for r in &self.rows {
            for (k, v) in r.error_curve.iter().enumerate() {
                e.write_record([r.algorithm.to_string(), r.n.to_string(), k.to_string(), f(*v)])?;
            }
        }
        e.flush()?;
        Ok(())
    }
}

/// Per time step, `max_x |J_t(x) − LERP[J_ref,t](x)|` over the result grid.
/// Two infinite values count as equal.
pub fn error_curve(result: &ValueIterationResult, reference: &ValueIterationResult) -> Result<Vec<f64>> {
    if result.costs.len() != reference.costs.len() {
        return Err(Error::Config(format!(
            "horizons differ: {} vs {}",
            result.horizon(),
            reference.horizon()
        )));
    }
    let mut out = Vec::with_capacity(result.costs.len());
    for (j, r) in result.costs.iter().zip(&reference.costs) {
        let g = j.grid();
        let mut x = vec![0.0; g.dims()];
        let mut worst = 0.0f64;
        for (i, &v) in j.values().iter().enumerate() {
            g.point_into(i, &mut x);
            let w = r.lerp_eval(&x)?;
            let d = if v == w { 0.0 } else { (v - w).abs() };
            worst = worst.max(d);
        }
        out.push(worst);
    }
    Ok(out)
}

/// `count` points drawn uniformly from the state box.
pub fn sample_initial_states(problem: &ControlProblem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = problem.state_box();
    (0..count)
        .map(|_| b.lo().iter().zip(b.hi()).map(|(&l, &h)| l + (h - l) * rng.random::<f64>()).collect())
        .collect()
}

fn mean_ratio(costs: &[f64], reference: &[f64], included: &[usize]) -> f64 {
    if included.is_empty() {
        return f64::NAN;
    }
    included.iter().map(|&i| costs[i] / reference[i]).sum::<f64>() / included.len() as f64
}

fn rollouts(
    x0: &[Vec<f64>],
    seed: u64,
    f: impl Fn(&[f64], u64) -> Result<TrajectoryResult> + Sync,
) -> Result<Vec<TrajectoryResult>> {
    x0.par_iter().enumerate().map(|(i, x)| f(x, seed.wrapping_add(i as u64))).collect()
}

/// Runs every (algorithm, N) cell against a d-DP reference and writes the
/// report when an output directory is configured.
pub fn run(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let problem = config.load_problem()?;
    for &a in &config.algorithms {
        if a == Algorithm::Cdp2 && !problem.is_separable() {
            return Err(Error::Config(format!("cdp2 needs a separable stage cost; '{}' is not", problem.name())));
        }
    }
    info!("reference: d-DP at N={} for {}", config.reference_n, problem.name());
    let reference = make_reference(&problem, config.reference_n, config.cache_dir.as_deref())?;
    let x0 = sample_initial_states(&problem, config.x0_count, config.seed);
    let ref_policies = reference.policies.as_ref().expect("d-DP reference has control laws");
    let reference_costs: Vec<f64> = rollouts(&x0, config.seed, |x, s| rollout_policy(ref_policies, &problem, x, s))?
        .iter()
        .map(|t| t.cost)
        .collect();
    let included: Vec<usize> = (0..x0.len()).filter(|&i| reference_costs[i].is_finite() && reference_costs[i] != 0.0).collect();
    let excluded_x0: Vec<usize> = (0..x0.len()).filter(|i| !included.contains(i)).collect();
    if !excluded_x0.is_empty() {
        warn!("{} initial states have an infeasible or zero reference cost and are left out", excluded_x0.len());
    }

    let mut rows = Vec::new();
    for &alg in &config.algorithms {
        for &n in &config.ns {
            let plan = config.plan(&problem, n)?;
            let vi = value_iteration(&problem, &plan, alg)?;
            let backward_time = vi.total_time();
            let error_curve = error_curve(&vi, &reference)?;
            let start = Instant::now();
            let greedy = rollouts(&x0, config.seed, |x, s| rollout_greedy(&vi, &problem, &plan, x, s))?;
            let forward_time = start.elapsed().as_secs_f64();
            let costs: Vec<f64> = greedy.iter().map(|t| t.cost).collect();
            let rel_cost_policy = match &vi.policies {
                Some(p) => {
                    let tr = rollouts(&x0, config.seed, |x, s| rollout_policy(p, &problem, x, s))?;
                    let c: Vec<f64> = tr.iter().map(|t| t.cost).collect();
                    Some(mean_ratio(&c, &reference_costs, &included))
                }
                None => None,
            };
            let row = ReportRow {
                algorithm: alg,
                n,
                error_curve,
                rel_cost: mean_ratio(&costs, &reference_costs, &included),
                rel_cost_policy,
                backward_time,
                forward_time,
                infeasible_rollouts: greedy.iter().filter(|t| t.infeasible).count(),
            };
            info!(
                "{alg} N={n}: rel cost {:.4}, backward {:.3}s, forward {:.3}s",
                row.rel_cost, row.backward_time, row.forward_time
            );
            rows.push(row);
        }
    }
    let report = BenchmarkReport {
        problem: problem.name().to_string(),
        horizon: problem.horizon(),
        reference_n: config.reference_n,
        seed: config.seed,
        x0,
        reference_costs,
        excluded_x0,
        rows,
        environment: Environment::current(),
    };
    if let Some(dir) = &config.out_dir {
        report.write(dir)?;
    }
    Ok(report)
}
