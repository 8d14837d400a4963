use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::cost::expl1_1d;
use super::{ControlProblem, CostTerm, Disturbance, ProblemBuilder};
use crate::grid::BoxSet;
use crate::{Error, Result};

pub const PRESET_NAMES: [&str; 4] = ["synthetic_separable", "synthetic_joint", "sir", "pendulum"];

/// Look up a built-in problem by name.
pub fn preset(name: &str) -> Result<ControlProblem> {
    match name {
        "synthetic_separable" => synthetic_separable(),
        "synthetic_joint" => synthetic_joint(),
        "sir" => sir(),
        "pendulum" => pendulum(),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// All built-in problems, in [`PRESET_NAMES`] order.
pub fn presets() -> Vec<ControlProblem> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("built-in preset")).collect()
}

fn unit_box(n: usize, lo: f64, hi: f64) -> BoxSet {
    BoxSet::new(vec![lo; n], vec![hi; n]).expect("valid box")
}

fn synthetic_a() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-0.5, 2.0, 1.0, 3.0])
}

fn synthetic_b() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, 1.0])
}

/// Linear 2-state, 2-input system with `C_s = C_T = ‖x‖²` and
/// `C_i(u) = e^{|u₁|} + e^{|u₂|} − 2`.
fn synthetic_separable() -> Result<ControlProblem> {
    ProblemBuilder::new("synthetic_separable")
        .id("synthetic_separable:A=[-0.5,2;1,3]:B=[1,0.5;1,1]:expl1")
        .horizon(10)
        .linear_state(synthetic_a())
        .input_matrix(synthetic_b())
        .separable_cost(CostTerm::squared_norm(2), CostTerm::ExpL1)
        .terminal_cost(CostTerm::squared_norm(2))
        .state_box(unit_box(2, -1.0, 1.0))
        .input_box(unit_box(2, -2.0, 2.0))
        .alpha(1.0)
        .build()
}

/// The synthetic system with the extra constraint `x + u ≤ (2, 2)`, posed
/// with a joint stage cost.
fn synthetic_joint() -> Result<ControlProblem> {
    let cost = |x: &[f64], u: &[f64]| {
        if u.iter().zip(x).any(|(ui, xi)| *ui > 2.0 - xi + 1e-12) {
            return f64::INFINITY;
        }
        x.iter().map(|v| v * v).sum::<f64>() + u.iter().map(|v| v.abs().exp() - 1.0).sum::<f64>()
    };
    let conj = |x: &[f64], v: &[f64]| {
        let s: f64 = (0..2).map(|i| expl1_1d(v[i], -2.0, (2.0 - x[i]).min(2.0))).sum();
        s - x.iter().map(|v| v * v).sum::<f64>()
    };
    ProblemBuilder::new("synthetic_joint")
        .id("synthetic_joint:A=[-0.5,2;1,3]:B=[1,0.5;1,1]:expl1:x+u<=2")
        .horizon(10)
        .linear_state(synthetic_a())
        .input_matrix(synthetic_b())
        .joint_cost(cost, Some(Arc::new(conj)))
        .terminal_cost(CostTerm::squared_norm(2))
        .state_box(unit_box(2, -1.0, 1.0))
        .input_box(unit_box(2, -2.0, 2.0))
        .alpha(1.0)
        .build()
}

/// SIR epidemic model with vaccination input, state `(s, i)`.
fn sir() -> Result<ControlProblem> {
    const ALPHA: f64 = 2.0;
    const BETA: f64 = 0.1;
    const GAMMA: f64 = 100.0;
    const U_MAX: f64 = 0.8;
    ProblemBuilder::new("sir")
        .id("sir:alpha=2:beta=0.1:gamma=100:umax=0.8")
        .horizon(3)
        .state_map(|x, out| {
            let (s, i) = (x[0], x[1]);
            out[0] = s - ALPHA * s * i;
            out[1] = (1.0 - BETA) * i + ALPHA * s * i;
        })
        .input_map(|x| {
            let (s, i) = (x[0], x[1]);
            DMatrix::from_column_slice(2, 1, &[-s + ALPHA * s * i, -ALPHA * s * i])
        })
        .joint_cost(
            |x, u| GAMMA * x[1] + u[0],
            Some(Arc::new(|x: &[f64], v: &[f64]| -GAMMA * x[1] + (U_MAX * (v[0] - 1.0)).max(0.0))),
        )
        .terminal_cost(CostTerm::Linear { c: vec![0.0, 1.0] })
        .state_box(BoxSet::new(vec![0.0, 0.0], vec![1.0, 0.5])?)
        .input_box(BoxSet::new(vec![0.0], vec![U_MAX])?)
        .alpha(0.5)
        .build()
}

/// Euler-discretized noisy inverted pendulum, state `(θ, θ̇)`.
fn pendulum() -> Result<ControlProblem> {
    const TAU: f64 = 0.05;
    const ALPHA: f64 = 118.6445;
    const BETA: f64 = -1.599;
    const GAMMA: f64 = 29.5398;
    let levels = [-0.05, -0.025, 0.0, 0.025, 0.05];
    let w = Disturbance::uniform_product(&[
        levels.iter().map(|l| PI / 4.0 * l).collect(),
        levels.iter().map(|l| PI * l).collect(),
    ])?;
    ProblemBuilder::new("pendulum")
        .id("pendulum:tau=0.05:alpha=118.6445:beta=-1.599:gamma=29.5398:B=tau*gamma")
        .horizon(50)
        .state_map(|x, out| {
            out[0] = x[0] + TAU * x[1];
            out[1] = x[1] + TAU * (ALPHA * x[0].sin() + BETA * x[1]);
        })
        .input_matrix(DMatrix::from_column_slice(2, 1, &[0.0, TAU * GAMMA]))
        .separable_cost(CostTerm::squared_norm(2), CostTerm::squared_norm(1))
        .terminal_cost(CostTerm::squared_norm(2))
        .state_box(BoxSet::new(vec![-PI / 4.0, -PI], vec![PI / 4.0, PI])?)
        .input_box(BoxSet::new(vec![-3.0], vec![3.0])?)
        .disturbance(w)
        .alpha(1.0)
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{feasibility_check, DiscretizationPlan};

    #[test]
    fn preset_parameters() {
        let p = preset("synthetic_separable").unwrap();
        let mut out = [0.0; 2];
        p.f_s(&[1.0, 0.0], &mut out);
        assert_eq!(out, [-0.5, 1.0]); // first column of A, so A(1,0) = 1
        assert_eq!(p.horizon(), 10);
        assert_eq!(preset("sir").unwrap().input_box().hi(), &[0.8]);
        assert_eq!(preset("sir").unwrap().default_alpha(), 0.5);
        assert_eq!(preset("pendulum").unwrap().horizon(), 50);
        assert_eq!(preset("pendulum").unwrap().disturbance().unwrap().len(), 25);
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
        assert_eq!(presets().len(), 4);
    }

    #[test]
    fn pendulum_violates_feasibility() {
        let p = preset("pendulum").unwrap();
        let plan = DiscretizationPlan::uniform(&p, 21, 21).unwrap();
        assert!(!feasibility_check(&p, &plan).is_feasible());
    }

    #[test]
    fn joint_constraint_and_conjugate() {
        let p = preset("synthetic_joint").unwrap();
        assert_eq!(p.stage_cost(&[0.5, 0.0], &[1.6, 0.0]), f64::INFINITY);
        assert!(p.stage_cost(&[0.5, 0.0], &[1.5, 0.0]).is_finite());
        let x = [0.5, -0.25];
        for v in [[0.0, 0.0], [3.0, -8.0], [-0.5, 20.0]] {
            let a = p.stage_conjugate(&x, &v).unwrap();
            let mut b = f64::NEG_INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    let u = [-2.0 + 4.0 * i as f64 / 400.0, -2.0 + 4.0 * j as f64 / 400.0];
                    b = b.max(v[0] * u[0] + v[1] * u[1] - p.stage_cost(&x, &u));
                }
            }
            assert!(a >= b - 1e-12 && a - b < 1e-2, "{v:?}: {a} vs {b}");
        }
    }

    #[test]
    fn sir_conjugate_matches_enumeration() {
        let p = preset("sir").unwrap();
        let x = [0.6, 0.2];
        for v in [-3.0, 0.5, 1.0, 1.7, 40.0] {
            let a = p.stage_conjugate(&x, &[v]).unwrap();
            let b = (0..=800)
                .map(|k| 0.8 * k as f64 / 800.0)
                .map(|u| v * u - p.stage_cost(&x, &[u]))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((a - b).abs() < 1e-9);
        }
    }
}
