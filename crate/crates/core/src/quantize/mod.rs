//! Uniform state quantization, abstraction error bounds and the explicit
//! finite MDP of a quantized scalar affine-Gaussian system.

mod bounds;
mod grid;
mod mdp;

pub use bounds::{delta_for_epsilon, epsilon_bound, optimal_gap, policy_interval};
pub use grid::{build_grid, Grid, Quantized, MAX_CELLS};
pub use mdp::{build_finite_mdp, FiniteMdp, ROW_TOLERANCE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizeError {
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("grid would have {0:.3e} cells")]
    TooManyCells(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("no explicit transition kernel available for system `{0}`")]
    UnsupportedOracle(String),
    #[error("row ({state}, {input}) sums to {sum}")]
    RowNotNormalized {
        state: usize,
        input: usize,
        sum: f64,
    },
    #[error("transition table shape does not match the state and input counts")]
    Shape,
}
