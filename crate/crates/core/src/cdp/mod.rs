//! Discrete conjugate dynamic programming (d-CDP).
//!
//! `cdp1` computes each step as a maximization over the state-dual grid `Y`
//! for every state. `cdp2` (separable costs, constant input matrix) replaces
//! that maximization by a second LLT onto the grid `Z` followed by LERP.

mod budget;
mod dual;
mod iteration;
mod operator;
mod stage;

pub use budget::{error_budget_alg1, error_budget_alg2, ErrorBudget};
pub use dual::{
    construct_v, construct_y, construct_y_with_range, construct_z, stage_cost_range, DualGridV, DualGridY,
    DualGridZ,
};
pub use iteration::{terminal_grid_fn, value_iteration, Algorithm, ValueIterationResult};
pub use operator::{cdp1_step, cdp2_step, expectation_filter};
pub use stage::{numeric_conj_stage_cost, StageConjugate};
