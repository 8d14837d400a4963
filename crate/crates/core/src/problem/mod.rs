//! Problem definitions, the discrete DP operator, feasibility checking, the
//! analytic-conjugate library and the built-in presets.

mod cost;
mod ddp;
pub mod file;
mod presets;

use std::fmt;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;

pub use cost::{conj_expl1_box, conj_l1_box, conj_quad_ball, conj_quad_box, expl1_1d, CostTerm};
pub use ddp::{ddp_step, ddp_step_stochastic, Policy};
pub(crate) use ddp::expected_lerp;
pub use presets::{preset, presets, PRESET_NAMES};

use crate::grid::{BoxSet, Grid};
use crate::{Error, Result};

/// `x ↦ f_s(x)`, written into the output slice.
pub type StateMap = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// `x ↦ f_i(x)`, an `n × m` matrix.
pub type InputMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// `(x, u) ↦ C(x, u)`, `+∞` outside the state-dependent input constraints.
pub type JointCost = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `(x, v) ↦ C_x*(v)`, the conjugate of `C(x, ·)`.
pub type JointConjugate = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum StateDynamics {
    Linear(DMatrix<f64>),
    Nonlinear(StateMap),
}

#[derive(Clone)]
pub enum InputDynamics {
    /// Constant input matrix `B`.
    Constant(DMatrix<f64>),
    StateDependent(InputMap),
}

#[derive(Clone)]
pub enum StageCost {
    Joint { cost: JointCost, conjugate: Option<JointConjugate> },
    /// `C(x, u) = C_s(x) + C_i(u)` on the input box.
    Separable { state: CostTerm, input: CostTerm },
}

/// Finite additive disturbance with a probability mass function.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    support: Vec<Vec<f64>>,
    pmf: Vec<f64>,
}

impl Disturbance {
    pub fn new(support: Vec<Vec<f64>>, pmf: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != pmf.len() {
            return Err(Error::InvalidDisturbance(
                "support and pmf must be nonempty and of equal length".into(),
            ));
        }
        let n = support[0].len();
        if support.iter().any(|w| w.len() != n || w.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidDisturbance("support points must be finite and of equal dimension".into()));
        }
        if pmf.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidDisturbance("probabilities must be nonnegative".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDisturbance(format!("probabilities sum to {total}, not 1")));
        }
        for i in 0..support.len() {
            for j in 0..i {
                if support[i] == support[j] {
                    return Err(Error::InvalidDisturbance("support points must be distinct".into()));
                }
            }
        }
        Ok(Self { support, pmf })
    }

    /// Point mass at the origin.
    pub fn zero(n: usize) -> Self {
        Self { support: vec![vec![0.0; n]], pmf: vec![1.0] }
    }

    /// Uniform distribution on the Cartesian product of per-dimension levels.
    pub fn uniform_product(levels: &[Vec<f64>]) -> Result<Self> {
        let g = Grid::new(levels.to_vec()).map_err(|e| Error::InvalidDisturbance(e.to_string()))?;
        let k = g.len();
        Self::new(g.points().collect(), vec![1.0 / k as f64; k])
    }

    pub fn dims(&self) -> usize {
        self.support[0].len()
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }
}

/// A finite-horizon optimal control problem with input-affine dynamics
/// `x⁺ = f_s(x) + f_i(x) u (+ w)`.
#[derive(Clone)]
pub struct ControlProblem {
    name: String,
    id: String,
    n: usize,
    m: usize,
    horizon: usize,
    state_dynamics: StateDynamics,
    input_dynamics: InputDynamics,
    stage_cost: StageCost,
    terminal_cost: CostTerm,
    state_box: BoxSet,
    input_box: BoxSet,
    disturbance: Option<Disturbance>,
    default_alpha: f64,
}

impl fmt::Debug for ControlProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlProblem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("horizon", &self.horizon)
            .field("separable", &self.is_separable())
            .field("state_box", &self.state_box)
            .field("input_box", &self.input_box)
            .field("disturbance", &self.disturbance)
            .finish()
    }
}

/// Builder for [`ControlProblem`].
pub struct ProblemBuilder {
    name: String,
    id: Option<String>,
    horizon: usize,
    state_dynamics: Option<StateDynamics>,
    input_dynamics: Option<InputDynamics>,
    stage_cost: Option<StageCost>,
    terminal_cost: Option<CostTerm>,
    state_box: Option<BoxSet>,
    input_box: Option<BoxSet>,
    disturbance: Option<Disturbance>,
    alpha: f64,
}

impl ProblemBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            id: None,
            horizon: 1,
            state_dynamics: None,
            input_dynamics: None,
            stage_cost: None,
            terminal_cost: None,
            state_box: None,
            input_box: None,
            disturbance: None,
            alpha: 1.0,
        }
    }

    /// Identity string used for cache keys; closures are not hashable so
    /// callers describe their parameters here.
    pub fn id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn horizon(mut self, t: usize) -> Self {
        self.horizon = t;
        self
    }

    pub fn linear_state(mut self, a: DMatrix<f64>) -> Self {
        self.state_dynamics = Some(StateDynamics::Linear(a));
        self
    }

    pub fn state_map(mut self, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.state_dynamics = Some(StateDynamics::Nonlinear(Arc::new(f)));
        self
    }

    pub fn input_matrix(mut self, b: DMatrix<f64>) -> Self {
        self.input_dynamics = Some(InputDynamics::Constant(b));
        self
    }

    pub fn input_map(mut self, f: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.input_dynamics = Some(InputDynamics::StateDependent(Arc::new(f)));
        self
    }

    pub fn joint_cost(
        mut self,
        cost: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        conjugate: Option<JointConjugate>,
    ) -> Self {
        self.stage_cost = Some(StageCost::Joint { cost: Arc::new(cost), conjugate });
        self
    }

    pub fn separable_cost(mut self, state: CostTerm, input: CostTerm) -> Self {
        self.stage_cost = Some(StageCost::Separable { state, input });
        self
    }

    pub fn terminal_cost(mut self, c: CostTerm) -> Self {
        self.terminal_cost = Some(c);
        self
    }

    pub fn state_box(mut self, b: BoxSet) -> Self {
        self.state_box = Some(b);
        self
    }

    pub fn input_box(mut self, b: BoxSet) -> Self {
        self.input_box = Some(b);
        self
    }

    pub fn disturbance(mut self, w: Disturbance) -> Self {
        self.disturbance = Some(w);
        self
    }

    pub fn alpha(mut self, a: f64) -> Self {
        self.alpha = a;
        self
    }

    pub fn build(self) -> Result<ControlProblem> {
        let missing = |what: &str| Error::InvalidProblem(format!("missing {what}"));
        let state_box = self.state_box.ok_or_else(|| missing("state box"))?;
        let input_box = self.input_box.ok_or_else(|| missing("input box"))?;
        let state_dynamics = self.state_dynamics.ok_or_else(|| missing("state dynamics"))?;
        let input_dynamics = self.input_dynamics.ok_or_else(|| missing("input dynamics"))?;
        let stage_cost = self.stage_cost.ok_or_else(|| missing("stage cost"))?;
        let terminal_cost = self.terminal_cost.ok_or_else(|| missing("terminal cost"))?;
        let (n, m) = (state_box.dims(), input_box.dims());
        if self.horizon == 0 {
            return Err(Error::InvalidProblem("horizon must be positive".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidProblem("alpha must be positive".into()));
        }
        if let StateDynamics::Linear(a) = &state_dynamics {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::InvalidProblem(format!("A must be {n}x{n}")));
            }
        }
        if let InputDynamics::Constant(b) = &input_dynamics {
            if b.nrows() != n || b.ncols() != m {
                return Err(Error::InvalidProblem(format!("B must be {n}x{m}")));
            }
        }
        if let StageCost::Separable { state, input } = &stage_cost {
            if !matches!(input_dynamics, InputDynamics::Constant(_)) {
                return Err(Error::InvalidProblem(
                    "separable stage cost requires a constant input matrix".into(),
                ));
            }
            state.validate(n)?;
            input.validate(m)?;
        }
        terminal_cost.validate(n)?;
        if let Some(w) = &self.disturbance {
            if w.dims() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.dims() });
            }
        }
        Ok(ControlProblem {
            id: self.id.unwrap_or_else(|| self.name.clone()),
            name: self.name,
            n,
            m,
            horizon: self.horizon,
            state_dynamics,
            input_dynamics,
            stage_cost,
            terminal_cost,
            state_box,
            input_box,
            disturbance: self.disturbance,
            default_alpha: self.alpha,
        })
    }
}

impl ControlProblem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_box(&self) -> &BoxSet {
        &self.state_box
    }

    pub fn input_box(&self) -> &BoxSet {
        &self.input_box
    }

    pub fn disturbance(&self) -> Option<&Disturbance> {
        self.disturbance.as_ref()
    }

    pub fn default_alpha(&self) -> f64 {
        self.default_alpha
    }

    pub fn stage_cost_form(&self) -> &StageCost {
        &self.stage_cost
    }

    pub fn terminal(&self) -> &CostTerm {
        &self.terminal_cost
    }

    pub fn with_horizon(mut self, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidProblem("horizon must be positive".into()));
        }
        self.horizon = t;
        Ok(self)
    }

    pub fn with_disturbance(mut self, w: Option<Disturbance>) -> Result<Self> {
        if let Some(w) = &w {
            if w.dims() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: w.dims() });
            }
        }
        self.disturbance = w;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidProblem("alpha must be positive".into()));
        }
        self.default_alpha = alpha;
        Ok(self)
    }

    /// Stable description of everything that determines the solution.
    pub fn fingerprint(&self) -> String {
        let w = match &self.disturbance {
            None => "none".to_string(),
            Some(d) => format!("{:?}|{:?}", d.support, d.pmf),
        };
        format!(
            "{}|T={}|X={:?}|U={:?}|W={}",
            self.id, self.horizon, self.state_box, self.input_box, w
        )
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.stage_cost, StageCost::Separable { .. })
    }

    /// `f_s(x)` written into `out`.
    #[inline]
    pub fn f_s(&self, x: &[f64], out: &mut [f64]) {
        match &self.state_dynamics {
            StateDynamics::Linear(a) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..self.n).map(|j| a[(i, j)] * x[j]).sum();
                }
            }
            StateDynamics::Nonlinear(f) => f(x, out),
        }
    }

    /// `f_i(x)` as an `n × m` matrix.
    pub fn f_i(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.input_dynamics {
            InputDynamics::Constant(b) => b.clone(),
            InputDynamics::StateDependent(f) => f(x),
        }
    }

    /// The constant input matrix, if any.
    pub fn input_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.input_dynamics {
            InputDynamics::Constant(b) => Some(b),
            InputDynamics::StateDependent(_) => None,
        }
    }

    /// `f(x, u) = f_s(x) + f_i(x) u`, without disturbance.
    pub fn next_state(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        self.f_s(x, out);
        let fi = self.f_i(x);
        add_mat_vec(&fi, u, out);
    }

    /// Stage cost `C(x, u)`; `+∞` when `u` leaves the input box or violates
    /// a state-dependent constraint.
    pub fn stage_cost(&self, x: &[f64], u: &[f64]) -> f64 {
        if !self.input_box.contains(u) {
            return f64::INFINITY;
        }
        match &self.stage_cost {
            StageCost::Joint { cost, .. } => cost(x, u),
            StageCost::Separable { state, input } => state.eval(x) + input.eval(u),
        }
    }

    pub fn terminal_cost(&self, x: &[f64]) -> f64 {
        self.terminal_cost.eval(x)
    }

    /// Conjugate of `C(x, ·)` at `v`, when available in closed form.
    pub fn stage_conjugate(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        match &self.stage_cost {
            StageCost::Joint { conjugate, .. } => conjugate.as_ref().map(|c| c(x, v)),
            StageCost::Separable { state, input } => {
                Some(input.conjugate_on_box(&self.input_box, v) - state.eval(x))
            }
        }
    }

    pub fn has_analytic_conjugate(&self) -> bool {
        match &self.stage_cost {
            StageCost::Joint { conjugate, .. } => conjugate.is_some(),
            StageCost::Separable { .. } => true,
        }
    }

    /// `C_s(x)`, separable form only.
    pub fn state_cost(&self, x: &[f64]) -> Option<f64> {
        match &self.stage_cost {
            StageCost::Separable { state, .. } => Some(state.eval(x)),
            StageCost::Joint { .. } => None,
        }
    }

    /// `C_i(u)` on the input box, separable form only.
    pub fn input_cost(&self, u: &[f64]) -> Option<f64> {
        match &self.stage_cost {
            StageCost::Separable { input, .. } => Some(if self.input_box.contains(u) {
                input.eval(u)
            } else {
                f64::INFINITY
            }),
            StageCost::Joint { .. } => None,
        }
    }

    /// `C_i*(v)` over the input box, separable form only.
    pub fn input_conjugate(&self, v: &[f64]) -> Option<f64> {
        match &self.stage_cost {
            StageCost::Separable { input, .. } => Some(input.conjugate_on_box(&self.input_box, v)),
            StageCost::Joint { .. } => None,
        }
    }
}

#[inline]
pub(crate) fn add_mat_vec(a: &DMatrix<f64>, u: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, uj) in u.iter().enumerate() {
            s += a[(i, j)] * uj;
        }
        *o += s;
    }
}

/// Grids and dual-size hints for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationPlan {
    pub state_grid: Grid,
    pub input_grid: Grid,
    /// Per-dimension counts of the state-dual grid; `None` matches the state grid.
    pub y_counts: Option<Vec<usize>>,
    /// Per-dimension counts of the grid for `f_s(X)`; `None` matches the state grid.
    pub z_counts: Option<Vec<usize>>,
    /// Per-dimension counts of the input-dual grid; `None` matches the input grid.
    pub v_counts: Option<Vec<usize>>,
    pub alpha: f64,
    /// Conjugate the stage cost numerically even when a closed form exists.
    pub numeric_conj: bool,
}

impl DiscretizationPlan {
    /// Uniform grids with `n_state` points per state dimension and `n_input`
    /// per input dimension over the problem boxes.
    pub fn uniform(problem: &ControlProblem, n_state: usize, n_input: usize) -> Result<Self> {
        let sb = problem.state_box();
        let ib = problem.input_box();
        let state_grid = Grid::uniform(sb.lo(), sb.hi(), &vec![n_state; problem.n()])?;
        let input_grid = Grid::uniform(ib.lo(), ib.hi(), &vec![n_input; problem.m()])?;
        Self::new(problem, state_grid, input_grid)
    }

    pub fn new(problem: &ControlProblem, state_grid: Grid, input_grid: Grid) -> Result<Self> {
        let plan = Self {
            state_grid,
            input_grid,
            y_counts: None,
            z_counts: None,
            v_counts: None,
            alpha: problem.default_alpha(),
            numeric_conj: false,
        };
        plan.validate(problem)?;
        Ok(plan)
    }

    pub fn validate(&self, problem: &ControlProblem) -> Result<()> {
        if self.state_grid.dims() != problem.n() {
            return Err(Error::DimensionMismatch { expected: problem.n(), got: self.state_grid.dims() });
        }
        if self.input_grid.dims() != problem.m() {
            return Err(Error::DimensionMismatch { expected: problem.m(), got: self.input_grid.dims() });
        }
        let inside = |g: &Grid, b: &BoxSet| {
            b.contains(&g.lower()) && b.contains(&g.upper())
        };
        if !inside(&self.state_grid, problem.state_box()) {
            return Err(Error::Config("state grid leaves the state box".into()));
        }
        if !inside(&self.input_grid, problem.input_box()) {
            return Err(Error::Config("input grid leaves the input box".into()));
        }
        for (what, counts, dims) in [
            ("Y", &self.y_counts, problem.n()),
            ("Z", &self.z_counts, problem.n()),
            ("V", &self.v_counts, problem.m()),
        ] {
            if let Some(c) = counts {
                if c.len() != dims || c.iter().any(|&k| k < 2) {
                    return Err(Error::Config(format!("{what} counts must have {dims} entries >= 2")));
                }
            }
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        Ok(())
    }

    pub fn y_counts(&self) -> Vec<usize> {
        self.y_counts.clone().unwrap_or_else(|| self.state_grid.shape())
    }

    pub fn z_counts(&self) -> Vec<usize> {
        self.z_counts.clone().unwrap_or_else(|| self.state_grid.shape())
    }

    pub fn v_counts(&self) -> Vec<usize> {
        self.v_counts.clone().unwrap_or_else(|| self.input_grid.shape())
    }
}

/// States of the grid without any admissible grid input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Flat indices into the state grid.
    pub infeasible: Vec<usize>,
    pub points: Vec<Vec<f64>>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }
}

/// List the grid states for which no `u` in the input grid has finite stage
/// cost and keeps `f(x, u)` inside the state box. Logs a warning when the
/// list is nonempty.
pub fn feasibility_check(problem: &ControlProblem, plan: &DiscretizationPlan) -> FeasibilityReport {
    let xs = &plan.state_grid;
    let us: Vec<Vec<f64>> = plan.input_grid.points().collect();
    let mut infeasible = Vec::new();
    let mut points = Vec::new();
    let mut next = vec![0.0; problem.n()];
    for i in 0..xs.len() {
        let x = xs.point(i);
        let ok = us.iter().any(|u| {
            if !problem.stage_cost(&x, u).is_finite() {
                return false;
            }
            problem.next_state(&x, u, &mut next);
            problem.state_box().contains(&next)
        });
        if !ok {
            infeasible.push(i);
            points.push(x);
        }
    }
    if !infeasible.is_empty() {
        warn!(
            "{}: {} of {} grid states have no feasible grid input",
            problem.name(),
            infeasible.len(),
            xs.len()
        );
    }
    FeasibilityReport { infeasible, points }
}
