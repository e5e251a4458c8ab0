//! Exact solution of the explicit product: finite-horizon value iteration,
//! positional-policy enumeration and the reward-shaping comparison.

mod instances;
mod policies;
mod value;

pub use instances::{random_instance, InstanceConfig, RandomInstance};
pub use policies::{
    enumerate_policies, evaluate_policy, policy_count, shaping_equivalence_check, PositionalPolicy,
    ShapingReport, MAX_POLICIES, VALUE_TIE,
};
pub use value::{value_iteration, DpSolution, ValueTable};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("start state {0} is not a state of the MDP")]
    StartOutOfRange(usize),
    #[error("policy chose input {0}, which does not exist")]
    InputOutOfRange(usize),
    #[error("more than {} positional policies", MAX_POLICIES)]
    TooManyPolicies,
    #[error("{0}")]
    Config(String),
}
