#![allow(dead_code)]

use dcdp::cdp::{DualGridY, DualGridZ};
use dcdp::conjugate::brute_conjugate;
use dcdp::grid::{BoxSet, Grid, GridFn};
use dcdp::control::evaluate_trajectory;
use dcdp::problem::{ControlProblem, CostTerm, DiscretizationPlan, ProblemBuilder};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn unit_box(n: usize) -> BoxSet {
    BoxSet::new(vec![-1.0; n], vec![1.0; n]).unwrap()
}

/// d-CDP operator evaluated literally: discrete conjugate of J by enumeration,
/// then a plain double loop over states and duals.
pub fn literal_cdp1(j: &GridFn, problem: &ControlProblem, y: &Grid) -> Vec<f64> {
    let n = problem.n();
    let ys: Vec<Vec<f64>> = y.points().collect();
    let jstar: Vec<f64> = ys.iter().map(|yk| brute_conjugate(j, yk).unwrap()).collect();
    let mut fs = vec![0.0; n];
    j.grid()
        .points()
        .map(|x| {
            problem.f_s(&x, &mut fs);
            let fi = problem.f_i(&x);
            let mut best = f64::NEG_INFINITY;
            for (yk, js) in ys.iter().zip(&jstar) {
                let v: Vec<f64> = (0..problem.m()).map(|c| -(0..n).map(|r| fi[(r, c)] * yk[r]).sum::<f64>()).collect();
                let val = dot(&fs, yk) - problem.stage_conjugate(&x, &v).unwrap() - js;
                best = best.max(val);
            }
            best
        })
        .collect()
}

/// Modified d-CDP operator evaluated literally: enumerated conjugates at the Y and Z grid
/// points, then LERP at `f_s(x)`.
pub fn literal_cdp2(j: &GridFn, problem: &ControlProblem, y: &Grid, z: &Grid) -> Vec<f64> {
    let n = problem.n();
    let b = problem.input_matrix().unwrap();
    let ys: Vec<Vec<f64>> = y.points().collect();
    let phi: Vec<f64> = ys
        .iter()
        .map(|yk| {
            let v: Vec<f64> = (0..problem.m()).map(|c| -(0..n).map(|r| b[(r, c)] * yk[r]).sum::<f64>()).collect();
            problem.input_conjugate(&v).unwrap() + brute_conjugate(j, yk).unwrap()
        })
        .collect();
    let phistar = GridFn::from_fn(z.clone(), |zk| {
        ys.iter().zip(&phi).map(|(yk, p)| dot(zk, yk) - p).fold(f64::NEG_INFINITY, f64::max)
    })
    .unwrap();
    let mut fs = vec![0.0; n];
    j.grid()
        .points()
        .map(|x| {
            problem.f_s(&x, &mut fs);
            problem.state_cost(&x).unwrap() + phistar.lerp(&fs)
        })
        .collect()
}

fn random_cost(rng: &mut ChaCha8Rng, dims: usize) -> CostTerm {
    match rng.random_range(0..3) {
        0 => {
            let d: Vec<f64> = (0..dims).map(|_| rng.random_range(0.5..2.0)).collect();
            let off = if dims == 2 { rng.random_range(-0.3..0.3) } else { 0.0 };
            let r = (0..dims)
                .map(|i| (0..dims).map(|k| if i == k { d[i] } else { off }).collect())
                .collect();
            CostTerm::Quadratic { r }
        }
        1 => CostTerm::L1,
        _ => CostTerm::ExpL1,
    }
}

/// Random separable linear problem with `n, m ≤ 2` on unit boxes.
pub fn random_linear_problem(rng: &mut ChaCha8Rng) -> ControlProblem {
    let n = rng.random_range(1..=2);
    let m = rng.random_range(1..=2);
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
    let state = random_cost(rng, n);
    let input = random_cost(rng, m);
    ProblemBuilder::new("random")
        .horizon(1)
        .linear_state(a)
        .input_matrix(b)
        .separable_cost(state, input)
        .terminal_cost(CostTerm::squared_norm(n))
        .state_box(unit_box(n))
        .input_box(unit_box(m))
        .build()
        .unwrap()
}

pub fn random_sides(rng: &mut ChaCha8Rng, dims: usize) -> Vec<usize> {
    (0..dims).map(|_| rng.random_range(3..=9)).collect()
}

/// Arbitrary finite values, not necessarily convex.
pub fn random_j(rng: &mut ChaCha8Rng, g: &Grid) -> GridFn {
    GridFn::new(g.clone(), (0..g.len()).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap()
}

/// Y wrapper around an explicit grid; the sizing metadata is unused by the
/// operators.
pub fn y_of(grid: Grid) -> DualGridY {
    DualGridY { half_widths: grid.upper(), grid, c_max: 0.0, c_min: 0.0, j_max: 0.0, j_min: 0.0, alpha: 1.0 }
}

pub fn z_of(grid: Grid) -> DualGridZ {
    DualGridZ { image_box: grid.bounding_box(), grid }
}

/// Axis-wise second differences are nonnegative up to `1e-9` of the largest
/// magnitude.
pub fn second_differences_ok(f: &GridFn) -> bool {
    let g = f.grid();
    let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for d in 0..g.dims() {
        let s = g.strides()[d];
        let c = g.axis(d);
        for i in 0..g.len() {
            let k = g.multi_index(i)[d];
            if k == 0 || k + 1 >= c.len() {
                continue;
            }
            let (a, b, e) = (f.values()[i - s], f.values()[i], f.values()[i + s]);
            let left = (b - a) / (c[k] - c[k - 1]);
            let right = (e - b) / (c[k + 1] - c[k]);
            if right - left < -1e-9 * scale {
                return false;
            }
        }
    }
    true
}

/// `x⁺ = x + u` on a grid that the input grid maps into itself.
pub fn shift_problem(horizon: usize) -> (ControlProblem, DiscretizationPlan) {
    let p = ProblemBuilder::new("shift")
        .horizon(horizon)
        .linear_state(DMatrix::identity(1, 1))
        .input_matrix(DMatrix::identity(1, 1))
        .separable_cost(CostTerm::ExpL1, CostTerm::L1)
        .terminal_cost(CostTerm::Linear { c: vec![-1.5] })
        .state_box(BoxSet::new(vec![-2.0], vec![2.0]).unwrap())
        .input_box(unit_box(1))
        .build()
        .unwrap();
    let plan = DiscretizationPlan::uniform(&p, 9, 5).unwrap();
    (p, plan)
}

/// Minimum of the trajectory cost over all input sequences from the grid,
/// with every state kept in the box.
pub fn exhaustive(p: &ControlProblem, plan: &DiscretizationPlan, x0: &[f64]) -> f64 {
    let us: Vec<Vec<f64>> = plan.input_grid.points().collect();
    let t = p.horizon();
    let total = us.len().pow(t as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut c = code;
        let mut states = vec![x0.to_vec()];
        let mut inputs = Vec::new();
        let mut ok = true;
        for _ in 0..t {
            let u = us[c % us.len()].clone();
            c /= us.len();
            let mut next = vec![0.0; p.n()];
            p.next_state(states.last().unwrap(), &u, &mut next);
            if !p.state_box().contains(&next) {
                ok = false;
                break;
            }
            inputs.push(u);
            states.push(next);
        }
        if ok {
            best = best.min(evaluate_trajectory(p, &states, &inputs).unwrap());
        }
    }
    best
}
