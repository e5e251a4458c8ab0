//! Finite-horizon tabular Q-learning over product observations and
//! Monte-Carlo evaluation of the learned policy.

mod evaluate;
mod table;
mod train;

pub use evaluate::{
    evaluate, hoeffding_half_width, initial_observation, reported_value, Evaluation,
};
pub use table::{extract_policy, LearnedPolicy, QTable, QTableMeta, DENSE_LIMIT};
pub use train::{train, Exploration, LearningRate, TrainConfig};

use thiserror::Error;

use crate::product::ProductError;

#[derive(Debug, Error)]
pub enum QLearnError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("at least one episode is required")]
    NoEpisodes,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
