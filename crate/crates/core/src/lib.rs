//! Discrete conjugate dynamic programming (d-CDP) for finite-horizon,
//! discrete-time optimal control of input-affine systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: rectangular grids, discrete functions on them and their
//!   multilinear interpolation/extrapolation (LERP).
//! - [`conjugate`]: the linear-time Legendre transform (LLT), a brute-force
//!   conjugation oracle, slope ranges and conjugation error bounds.
//! - [`problem`]: problem definitions, the benchmark discrete DP operator,
//!   feasibility checks, analytic conjugates and the built-in presets.
//! - [`cdp`]: the conjugate-domain operators, dual grid construction,
//!   the expectation filter, multistep drivers and error budgets.
//! - [`control`]: forward rollouts turning costs-to-go into input sequences.
//! - [`bench`]: reference solutions, error curves, trajectory-cost tables
//!   and runtime scaling studies.

pub mod bench;
pub mod cdp;
pub mod conjugate;
pub mod control;
mod error;
pub mod grid;
pub mod problem;

pub use error::{Error, Result};
