use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use dcdp::bench::{run, ExperimentConfig, ProblemSource};
use dcdp::cdp::{construct_v, value_iteration, Algorithm};
use dcdp::conjugate::llt_nd;
use dcdp::control::{rollout_greedy, rollout_policy};
use dcdp::grid::{io, Grid, GridFn};
use dcdp::problem::PRESET_NAMES;
use log::info;

#[derive(Parser)]
#[command(name = "dcdp", version, about = "Discrete conjugate dynamic programming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value iteration, rollouts and timing against a d-DP reference.
    Run(RunArgs),
    /// Discrete conjugate of a grid function (JSON or CSV).
    Transform(TransformArgs),
    /// Solve once and roll out from a single initial state.
    Rollout(RolloutArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in problem.
    #[arg(long, conflicts_with = "problem_file")]
    preset: Option<String>,
    /// JSON problem description.
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Horizon override.
    #[arg(long)]
    horizon: Option<usize>,
    /// Scaling factor of the state-dual grid.
    #[arg(long)]
    alpha: Option<f64>,
    /// Conjugate the stage cost numerically.
    #[arg(long)]
    numeric_conj: bool,
    /// Points per dimension of the state-dual grid.
    #[arg(long)]
    y_n: Option<usize>,
    /// Points per dimension of the grid covering the state-dynamics image.
    #[arg(long)]
    z_n: Option<usize>,
    /// Points per dimension of the input-dual grid.
    #[arg(long)]
    v_n: Option<usize>,
}

impl ProblemArgs {
    fn source(&self) -> Result<ProblemSource, ConfigError> {
        match (&self.preset, &self.problem_file) {
            (Some(p), None) => Ok(ProblemSource::Preset(p.clone())),
            (None, Some(f)) => Ok(ProblemSource::File(f.clone())),
            _ => Err(ConfigError(format!(
                "pass --preset <{}> or --problem-file <path>",
                PRESET_NAMES.join("|")
            ))),
        }
    }

    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut c = ExperimentConfig::new(self.source()?);
        c.horizon = self.horizon;
        c.alpha = self.alpha;
        c.numeric_conj = self.numeric_conj;
        c.y_n = self.y_n;
        c.z_n = self.z_n;
        c.v_n = self.v_n;
        Ok(c)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Algorithms, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "ddp,cdp2")]
    alg: Vec<Algorithm>,
    /// Points per dimension, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "11,21")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random initial states.
    #[arg(long, default_value_t = 10)]
    x0_count: usize,
    /// Output directory for report.json, table.csv and error_curves.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Points per dimension of the d-DP reference.
    #[arg(long, default_value_t = 41)]
    reference_n: usize,
    /// Directory for cached reference solutions.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Grid function file (.json or .csv).
    #[arg(long)]
    input: PathBuf,
    /// Output file (.json or .csv); stdout as JSON when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dual grid lower corner, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    dual_lo: Option<Vec<f64>>,
    /// Dual grid upper corner, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    dual_hi: Option<Vec<f64>>,
    /// Dual grid points per dimension; defaults to the primal shape.
    #[arg(long, value_delimiter = ',')]
    dual_n: Option<Vec<usize>>,
}

#[derive(Args)]
struct RolloutArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "cdp2")]
    alg: Algorithm,
    /// Points per dimension of the state and input grids.
    #[arg(long, default_value_t = 21)]
    n: usize,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x0: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the d-DP control laws instead of the greedy rule.
    #[arg(long)]
    policy: bool,
    /// Trajectory CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Invalid user input, reported with exit code 2.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn is_config_error(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<ConfigError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<dcdp::Error>(),
        Some(
            dcdp::Error::Config(_)
                | dcdp::Error::UnknownPreset(_)
                | dcdp::Error::InvalidProblem(_)
                | dcdp::Error::InvalidDisturbance(_)
                | dcdp::Error::Unsupported { .. }
                | dcdp::Error::Json(_)
                | dcdp::Error::Parse(_)
        )
    )
}

fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn cmd_run(a: RunArgs) -> anyhow::Result<()> {
    let mut c = a.problem.config()?;
    c.algorithms = a.alg;
    c.ns = a.n;
    c.seed = a.seed;
    c.x0_count = a.x0_count;
    c.out_dir = a.out;
    c.reference_n = a.reference_n;
    c.cache_dir = a.cache_dir;
    let report = run(&c)?;
    println!("{:<6} {:>5} {:>10} {:>10} {:>12} {:>12}", "alg", "N", "rel_cost", "rel_mu", "backward_s", "forward_s");
    for r in &report.rows {
        let mu = r.rel_cost_policy.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<6} {:>5} {:>10.4} {:>10} {:>12.4e} {:>12.4e}",
            r.algorithm.to_string(),
            format!("{}^{}", r.n, report.x0.first().map_or(0, Vec::len)),
            r.rel_cost,
            mu,
            r.backward_time,
            r.forward_time
        );
    }
    if let Some(dir) = &c.out_dir {
        info!("report written to {}", dir.display());
    }
    Ok(())
}

fn cmd_transform(a: TransformArgs) -> anyhow::Result<()> {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let f: GridFn = if is_csv(&a.input) {
        io::read_csv(BufReader::new(file))?
    } else {
        io::read_json(BufReader::new(file))?
    };
    let n = f.grid().dims();
    let counts = a.dual_n.unwrap_or_else(|| f.grid().shape());
    if counts.len() != n {
        bail!(ConfigError(format!("--dual-n needs {n} entries")));
    }
    let dual = match (a.dual_lo, a.dual_hi) {
        (Some(lo), Some(hi)) => {
            if lo.len() != n || hi.len() != n {
                bail!(ConfigError(format!("--dual-lo and --dual-hi need {n} entries")));
            }
            Grid::uniform(&lo, &hi, &counts).map_err(|e| ConfigError(e.to_string()))?
        }
        (None, None) => construct_v(&f, &counts)?.grid,
        _ => bail!(ConfigError("pass both --dual-lo and --dual-hi, or neither".into())),
    };
    let conj = llt_nd(&f, &dual)?;
    match &a.out {
        Some(p) if is_csv(p) => io::write_csv(&conj.values, BufWriter::new(File::create(p)?))?,
        Some(p) => io::write_json(&conj.values, BufWriter::new(File::create(p)?))?,
        None => {
            io::write_json(&conj.values, std::io::stdout().lock())?;
            println!();
        }
    }
    Ok(())
}

fn cmd_rollout(a: RolloutArgs) -> anyhow::Result<()> {
    let c = a.problem.config()?;
    c.validate()?;
    let problem = c.load_problem()?;
    if a.x0.len() != problem.n() {
        bail!(ConfigError(format!("--x0 needs {} entries", problem.n())));
    }
    if a.policy && a.alg != Algorithm::Ddp {
        bail!(ConfigError("--policy needs --alg ddp".into()));
    }
    let plan = c.plan(&problem, a.n)?;
    let vi = value_iteration(&problem, &plan, a.alg)?;
    let tr = match (&vi.policies, a.policy) {
        (Some(p), true) => rollout_policy(p, &problem, &a.x0, a.seed)?,
        _ => rollout_greedy(&vi, &problem, &plan, &a.x0, a.seed)?,
    };
    match &a.out {
        Some(p) => tr.write_csv(BufWriter::new(File::create(p)?))?,
        None => tr.write_csv(std::io::stdout().lock())?,
    }
    eprintln!(
        "cost {} ({} steps{}{})",
        io::format_value(tr.cost),
        tr.inputs.len(),
        if tr.infeasible { ", infeasible" } else { "" },
        if tr.left_box { ", left the state box" } else { "" }
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Rollout(a) => cmd_rollout(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
