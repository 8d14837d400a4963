//! Cost catalog and closed-form conjugates over boxes and balls.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::grid::BoxSet;
use crate::{Error, Result};

/// Cost function from a fixed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CostTerm {
    /// `zᵀ R z` with `R` symmetric positive definite.
    Quadratic { r: Vec<Vec<f64>> },
    /// `Σ |z_i|`.
    L1,
    /// `Σ (e^{|z_i|} − 1)`.
    ExpL1,
    /// `cᵀ z`.
    Linear { c: Vec<f64> },
}

impl CostTerm {
    /// Squared Euclidean norm in dimension `n`.
    pub fn squared_norm(n: usize) -> Self {
        let r = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        CostTerm::Quadratic { r }
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        match self {
            CostTerm::Quadratic { r } => {
                if r.len() != dims || r.iter().any(|row| row.len() != dims) {
                    return Err(Error::InvalidProblem(format!(
                        "quadratic cost needs a {dims}x{dims} matrix"
                    )));
                }
                check_spd(&to_matrix(r))
            }
            CostTerm::Linear { c } if c.len() != dims => Err(Error::DimensionMismatch {
                expected: dims,
                got: c.len(),
            }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            CostTerm::Quadratic { r } => {
                let mut s = 0.0;
                for (i, row) in r.iter().enumerate() {
                    let ri: f64 = row.iter().zip(z).map(|(a, b)| a * b).sum();
                    s += z[i] * ri;
                }
                s
            }
            CostTerm::L1 => z.iter().map(|v| v.abs()).sum(),
            CostTerm::ExpL1 => z.iter().map(|v| v.abs().exp() - 1.0).sum(),
            CostTerm::Linear { c } => c.iter().zip(z).map(|(a, b)| a * b).sum(),
        }
    }

    /// Conjugate of the cost restricted to `dom`, evaluated at `v`.
    pub fn conjugate_on_box(&self, dom: &BoxSet, v: &[f64]) -> f64 {
        match self {
            CostTerm::Quadratic { r } => quad_box(&to_matrix(r), dom, v),
            CostTerm::L1 => conj_l1_box(dom, v),
            CostTerm::ExpL1 => conj_expl1_box(dom, v),
            CostTerm::Linear { c } => conj_linear_box(c, dom, v),
        }
    }
}

fn to_matrix(r: &[Vec<f64>]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| r[i][j])
}

fn check_spd(r: &DMatrix<f64>) -> Result<()> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::NotPositiveDefinite);
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (r[(i, j)], r[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::NotPositiveDefinite);
            }
        }
    }
    if r.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// `max_{u ∈ box} { ⟨v, u⟩ − uᵀ R u }`.
///
/// Solved by cyclic coordinate ascent, which is exact for diagonal `R` and
/// converges for any symmetric positive definite `R`.
pub fn conj_quad_box(r: &DMatrix<f64>, dom: &BoxSet, v: &[f64]) -> Result<f64> {
    check_spd(r)?;
    if r.nrows() != dom.dims() || v.len() != dom.dims() {
        return Err(Error::DimensionMismatch { expected: r.nrows(), got: v.len() });
    }
    Ok(quad_box(r, dom, v))
}

fn quad_box(r: &DMatrix<f64>, dom: &BoxSet, v: &[f64]) -> f64 {
    let n = v.len();
    let mut u = vec![0.0; n];
    dom.clamp(&mut u);
    for _ in 0..10_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| (r[(i, j)] + r[(j, i)]) * u[j]).sum();
            let ui = ((v[i] - off) / (2.0 * r[(i, i)])).clamp(dom.lo()[i], dom.hi()[i]);
            change = change.max((ui - u[i]).abs());
            u[i] = ui;
        }
        if change <= 1e-15 * (1.0 + u.iter().fold(0.0f64, |m, x| m.max(x.abs()))) {
            break;
        }
    }
    let uv = DVector::from_column_slice(&u);
    let quad = (uv.transpose() * r * &uv)[(0, 0)];
    v.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() - quad
}

/// `max_{‖u‖ ≤ radius} { ⟨v, u⟩ − uᵀ R u }`.
pub fn conj_quad_ball(r: &DMatrix<f64>, radius: f64, v: &[f64]) -> Result<f64> {
    check_spd(r)?;
    if r.nrows() != v.len() {
        return Err(Error::DimensionMismatch { expected: r.nrows(), got: v.len() });
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidProblem("ball radius must be nonnegative".into()));
    }
    let eig = SymmetricEigen::new(r.clone());
    let w = eig.eigenvectors.transpose() * DVector::from_column_slice(v);
    let lam = &eig.eigenvalues;
    // u in the eigenbasis for multiplier mu: w_k / (2 (lam_k + mu))
    let norm_at = |mu: f64| {
        w.iter()
            .zip(lam.iter())
            .map(|(wk, lk)| (wk / (2.0 * (lk + mu))).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mu = if norm_at(0.0) <= radius {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while norm_at(hi) > radius {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_at(mid) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let u: Vec<f64> = w.iter().zip(lam.iter()).map(|(wk, lk)| wk / (2.0 * (lk + mu))).collect();
    Ok(w.iter()
        .zip(&u)
        .zip(lam.iter())
        .map(|((wk, uk), lk)| wk * uk - lk * uk * uk)
        .sum())
}

/// `max_{u ∈ box} { ⟨v, u⟩ − Σ |u_i| }`.
pub fn conj_l1_box(dom: &BoxSet, v: &[f64]) -> f64 {
    (0..v.len())
        .map(|i| {
            let (a, b) = (dom.lo()[i], dom.hi()[i]);
            let g = |u: f64| v[i] * u - u.abs();
            let mut best = g(a).max(g(b));
            if a <= 0.0 && 0.0 <= b {
                best = best.max(0.0);
            }
            best
        })
        .sum()
}

/// `max_{u ∈ box} { ⟨v, u⟩ − Σ (e^{|u_i|} − 1) }`.
///
/// Per coordinate the maximizer is `sgn(v) ln|v|` when `|v| > 1` and `0`
/// otherwise, clamped to the box.
pub fn conj_expl1_box(dom: &BoxSet, v: &[f64]) -> f64 {
    (0..v.len()).map(|i| expl1_1d(v[i], dom.lo()[i], dom.hi()[i])).sum()
}

/// One coordinate of [`conj_expl1_box`] on `[lo, hi]`.
pub fn expl1_1d(v: f64, lo: f64, hi: f64) -> f64 {
    let u = if v.abs() > 1.0 { v.signum() * v.abs().ln() } else { 0.0 };
    let u = u.clamp(lo, hi);
    v * u - u.abs().exp() + 1.0
}

fn conj_linear_box(c: &[f64], dom: &BoxSet, v: &[f64]) -> f64 {
    (0..v.len())
        .map(|i| {
            let s = v[i] - c[i];
            (s * dom.lo()[i]).max(s * dom.hi()[i])
        })
        .sum()
}
