//! Custom problems from a JSON description.
//!
//! ```json
//! {
//!   "name": "double_integrator",
//!   "a": [[1, 0.1], [0, 1]],
//!   "b": [[0], [0.1]],
//!   "state_box": { "lo": [-1, -1], "hi": [1, 1] },
//!   "input_box": { "lo": [-1], "hi": [1] },
//!   "horizon": 20,
//!   "state_cost": { "type": "quadratic", "r": [[1, 0], [0, 1]] },
//!   "input_cost": { "type": "l1" },
//!   "terminal_cost": { "type": "linear", "c": [0, 1] },
//!   "disturbance": { "support": [[0, -0.01], [0, 0.01]], "pmf": [0.5, 0.5] },
//!   "alpha": 1.0
//! }
//! ```
//!
//! Dynamics are linear, `x⁺ = A x + B u (+ w)`, and the stage cost is
//! separable. Cost types: `quadratic` (`r`), `l1`, `expl1`, `linear` (`c`).

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ControlProblem, CostTerm, Disturbance, ProblemBuilder};
use crate::grid::BoxSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub state_box: BoxSet,
    pub input_box: BoxSet,
    pub horizon: usize,
    pub state_cost: CostTerm,
    pub input_cost: CostTerm,
    pub terminal_cost: CostTerm,
    #[serde(default)]
    pub disturbance: Option<DisturbanceFile>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceFile {
    pub support: Vec<Vec<f64>>,
    pub pmf: Vec<f64>,
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidProblem(format!("{what} must be a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<ControlProblem> {
        // boxes arrive through serde, so re-check their invariants
        let state_box = BoxSet::new(self.state_box.lo().to_vec(), self.state_box.hi().to_vec())?;
        let input_box = BoxSet::new(self.input_box.lo().to_vec(), self.input_box.hi().to_vec())?;
        let id = format!("file:{}", serde_json::to_string(&self)?);
        let mut b = ProblemBuilder::new(self.name)
            .id(id)
            .horizon(self.horizon)
            .linear_state(matrix(&self.a, "a")?)
            .input_matrix(matrix(&self.b, "b")?)
            .separable_cost(self.state_cost, self.input_cost)
            .terminal_cost(self.terminal_cost)
            .state_box(state_box)
            .input_box(input_box);
        if let Some(w) = self.disturbance {
            b = b.disturbance(Disturbance::new(w.support, w.pmf)?);
        }
        if let Some(a) = self.alpha {
            b = b.alpha(a);
        }
        b.build()
    }
}

pub fn parse_problem(text: &str) -> Result<ControlProblem> {
    let f: ProblemFile = serde_json::from_str(text)?;
    f.into_problem()
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ControlProblem> {
    parse_problem(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "name": "di",
        "a": [[1, 0.1], [0, 1]],
        "b": [[0], [0.1]],
        "state_box": { "lo": [-1, -1], "hi": [1, 1] },
        "input_box": { "lo": [-1], "hi": [1] },
        "horizon": 20,
        "state_cost": { "type": "quadratic", "r": [[1, 0], [0, 1]] },
        "input_cost": { "type": "l1" },
        "terminal_cost": { "type": "linear", "c": [0, 1] },
        "disturbance": { "support": [[0, -0.01], [0, 0.01]], "pmf": [0.5, 0.5] }
    }"#;

    #[test]
    fn parses_documented_example() {
        let p = parse_problem(DOC).unwrap();
        assert_eq!((p.n(), p.m(), p.horizon()), (2, 1, 20));
        assert!(p.is_separable());
        let mut out = [0.0; 2];
        p.next_state(&[0.5, 1.0], &[-1.0], &mut out);
        assert!((out[0] - 0.6).abs() < 1e-15 && (out[1] - 0.9).abs() < 1e-15);
        assert_eq!(p.stage_cost(&[1.0, 2.0], &[-0.5]), 5.5);
        assert_eq!(p.terminal_cost(&[3.0, 2.0]), 2.0);
        assert_eq!(p.disturbance().unwrap().len(), 2);
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(parse_problem("{").is_err());
        let bad = DOC.replace("\"b\": [[0], [0.1]]", "\"b\": [[0, 1], [0.1]]");
        assert!(parse_problem(&bad).is_err());
        let bad = DOC.replace("\"type\": \"l1\"", "\"type\": \"cubic\"");
        assert!(parse_problem(&bad).is_err());
        let bad = DOC.replace("\"lo\": [-1], \"hi\": [1]", "\"lo\": [1], \"hi\": [-1]");
        assert!(parse_problem(&bad).is_err());
        let bad = DOC.replace("[0.5, 0.5]", "[0.5, 0.7]");
        assert!(parse_problem(&bad).is_err());
    }
}
