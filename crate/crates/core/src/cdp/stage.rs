//! Stage-cost conjugates: closed form, or numeric via LLT on an input-dual
//! grid followed by LERP.

use rayon::prelude::*;

use super::dual::{construct_v, DualGridV};
use crate::conjugate::{llt_nd, ConjugateResult};
use crate::grid::GridFn;
use crate::problem::{ControlProblem, DiscretizationPlan, StageCost};
use crate::{Error, Result};

/// Discrete conjugate of a sampled stage cost on `v`.
pub fn numeric_conj_stage_cost(cost: &GridFn, v: &DualGridV) -> Result<ConjugateResult> {
    llt_nd(cost, &v.grid)
}

/// Source of `C_x*(v)` for the operators.
#[derive(Debug, Clone)]
pub enum StageConjugate {
    /// Closed form supplied by the problem.
    Analytic,
    /// One table per state-grid point (joint stage cost).
    PerState { v: Vec<DualGridV>, tables: Vec<ConjugateResult> },
    /// Table of the input cost `C_i*` (separable stage cost).
    Input { v: DualGridV, table: ConjugateResult },
}

impl StageConjugate {
    /// Closed form when available and not overridden, numeric tables
    /// otherwise.
    pub fn prepare(problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<Self> {
        if !plan.numeric_conj && problem.has_analytic_conjugate() {
            return Ok(StageConjugate::Analytic);
        }
        Self::numeric(problem, plan)
    }

    /// Numeric tables regardless of closed-form availability.
    pub fn numeric(problem: &ControlProblem, plan: &DiscretizationPlan) -> Result<Self> {
        let ug = &plan.input_grid;
        let counts = plan.v_counts();
        match problem.stage_cost_form() {
            StageCost::Separable { .. } => {
                let cost = GridFn::from_fn(ug.clone(), |u| problem.input_cost(u).unwrap())?;
                let v = construct_v(&cost, &counts)?;
                let table = numeric_conj_stage_cost(&cost, &v)?;
                Ok(StageConjugate::Input { v, table })
            }
            StageCost::Joint { .. } => {
                let xs = &plan.state_grid;
                let built: Vec<(DualGridV, ConjugateResult)> = (0..xs.len())
                    .into_par_iter()
                    .map(|i| {
                        let x = xs.point(i);
                        let cost = GridFn::from_fn(ug.clone(), |u| problem.stage_cost(&x, u))?;
                        if !cost.has_finite_support() {
                            return Err(Error::InvalidProblem(format!(
                                "stage cost is infinite for every grid input at x = {x:?}"
                            )));
                        }
                        let v = construct_v(&cost, &counts)?;
                        let t = numeric_conj_stage_cost(&cost, &v)?;
                        Ok((v, t))
                    })
                    .collect::<Result<_>>()?;
                let (v, tables) = built.into_iter().unzip();
                Ok(StageConjugate::PerState { v, tables })
            }
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, StageConjugate::Analytic)
    }

    /// `C_x*(v)` at the state-grid point with flat index `i` and coordinates `x`.
    #[inline]
    pub fn joint(&self, problem: &ControlProblem, i: usize, x: &[f64], v: &[f64]) -> f64 {
        match self {
            StageConjugate::Analytic => problem.stage_conjugate(x, v).expect("closed-form conjugate"),
            StageConjugate::PerState { tables, .. } => tables[i].values.lerp(v),
            StageConjugate::Input { table, .. } => {
                table.values.lerp(v) - problem.state_cost(x).expect("separable cost")
            }
        }
    }

    /// `C_i*(v)` for separable problems.
    #[inline]
    pub fn input(&self, problem: &ControlProblem, v: &[f64]) -> Result<f64> {
        match self {
            StageConjugate::Analytic => problem.input_conjugate(v).ok_or_else(|| Error::Unsupported {
                algorithm: "cdp2".into(),
                reason: "stage cost is not separable".into(),
            }),
            StageConjugate::Input { table, .. } => Ok(table.values.lerp(v)),
            StageConjugate::PerState { .. } => Err(Error::Unsupported {
                algorithm: "cdp2".into(),
                reason: "per-state conjugate tables need the joint operator".into(),
            }),
        }
    }
}
