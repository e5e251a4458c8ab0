//! Operational product of a quantized system with a co-safety automaton:
//! observation filtering, automaton progress, rewards and termination.

mod env;
mod interpreter;
mod reward;

pub use env::{ContinuousEnv, Environment, FiniteMdpEnv, InitialState};
pub use interpreter::{
    run_episode, write_trace, Episode, EpisodeStep, Interpreter, Policy, ProductState,
};
pub use reward::{potential, reward, state_potential, RewardConfig, RewardMode, DEFAULT_KAPPA};

use thiserror::Error;

use crate::system::SystemError;

#[derive(Debug, Error)]
pub enum ProductError {
    #[error("the episode has already terminated")]
    TerminalStep,
    #[error("initial state lies outside the state box")]
    OutsideDomain,
    #[error("input index {0} is not in the input set")]
    InputOutOfRange(usize),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    System(#[from] SystemError),
}
