use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{QLearnError, QTable, QTableMeta};
use crate::product::{Environment, Interpreter, RewardConfig};
use crate::scltl::Dfa;

/// Step size as a function of the number of earlier updates of the entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearningRate {
    /// `1 / (1 + n)^ω`.
    Polynomial {
        exponent: f64,
    },
    Constant(f64),
}

impl LearningRate {
    pub fn rate(&self, visits: u64) -> f64 {
        match *self {
            LearningRate::Polynomial { exponent } => (1.0 + visits as f64).powf(-exponent),
            LearningRate::Constant(a) => a,
        }
    }

    fn validate(&self) -> Result<(), QLearnError> {
        match *self {
            LearningRate::Polynomial { exponent } if exponent > 0.5 && exponent <= 1.0 => Ok(()),
            LearningRate::Polynomial { exponent } => Err(QLearnError::Schedule(format!(
                "learning-rate exponent {exponent} not in (0.5, 1]"
            ))),
            LearningRate::Constant(a) if a > 0.0 && a <= 1.0 => Ok(()),
            LearningRate::Constant(a) => Err(QLearnError::Schedule(format!(
                "learning rate {a} not in (0, 1]"
            ))),
        }
    }
}

impl Default for LearningRate {
    fn default() -> Self {
        LearningRate::Polynomial { exponent: 0.7 }
    }
}

/// ε-greedy exploration decaying linearly from `start` to `end` over the
/// first `decay_fraction` of the episodes, then held at `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exploration {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for Exploration {
    fn default() -> Self {
        Exploration {
            start: 1.0,
            end: 0.05,
            decay_fraction: 0.8,
        }
    }
}

impl Exploration {
    pub fn constant(epsilon: f64) -> Self {
        Exploration {
            start: epsilon,
            end: epsilon,
            decay_fraction: 1.0,
        }
    }

    pub fn epsilon(&self, episode: u64, episodes: u64) -> f64 {
        let span = self.decay_fraction * episodes as f64;
        let t = if span > 0.0 {
            (episode as f64 / span).min(1.0)
        } else {
            1.0
        };
        self.start + (self.end - self.start) * t
    }

    fn validate(&self) -> Result<(), QLearnError> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.start) || !unit(self.end) {
            return Err(QLearnError::Schedule(
                "exploration rates must lie in [0, 1]".into(),
            ));
        }
        if self.end > self.start {
            return Err(QLearnError::Schedule(format!(
                "exploration must not increase ({} → {})",
                self.start, self.end
            )));
        }
        if !(self.decay_fraction > 0.0 && self.decay_fraction <= 1.0) {
            return Err(QLearnError::Schedule(format!(
                "decay fraction {} not in (0, 1]",
                self.decay_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub episodes: u64,
    pub seed: u64,
    pub reward: RewardConfig,
    pub learning_rate: LearningRate,
    pub exploration: Exploration,
}

impl TrainConfig {
    pub fn new(episodes: u64, seed: u64, reward: RewardConfig) -> Self {
        TrainConfig {
            episodes,
            seed,
            reward,
            learning_rate: LearningRate::default(),
            exploration: Exploration::default(),
        }
    }

    pub fn validate(&self) -> Result<(), QLearnError> {
        if self.episodes == 0 {
            return Err(QLearnError::NoEpisodes);
        }
        self.learning_rate.validate()?;
        self.exploration.validate()
    }
}

fn greedy_input(values: Option<&[f64]>) -> usize {
    let Some(v) = values else { return 0 };
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Episodic Q-learning with time-indexed backups
/// `Q[k](s, ν) += α (r + max_ν' Q[k+1](s', ν') − Q[k](s, ν))`, where
/// `Q[T] ≡ 0` and terminal transitions bootstrap 0. One random stream,
/// seeded from `config.seed`, drives both exploration and the environment.
pub fn train<E: Environment>(
    env: E,
    dfa: &Dfa,
    horizon: usize,
    config: &TrainConfig,
) -> Result<QTable, QLearnError> {
    config.validate()?;
    let nu = env.num_inputs();
    let mut table = QTable::new(horizon, env.num_cells(), dfa.num_states(), nu);
    table.meta = QTableMeta {
        seed: config.seed,
        episodes: config.episodes,
        mode: config.reward.mode(),
        kappa: config.reward.kappa(),
        delta: None,
    };
    let mut interp = Interpreter::new(env, dfa, config.reward, horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for episode in 0..config.episodes {
        let eps = config.exploration.epsilon(episode, config.episodes);
        let mut s = interp.reset(&mut rng)?;
        while !interp.is_terminal() {
            let u = if rng.random::<f64>() < eps {
                rng.random_range(0..nu)
            } else {
                greedy_input(table.values(s.k, s.cell, s.q))
            };
            let step = interp.step(u, &mut rng)?;
            let next = step.next;
            let target = if step.terminal {
                step.reward
            } else {
                step.reward + table.max_value(next.k, next.cell, next.q)
            };
            let lr = config.learning_rate;
            table.update(s.k, s.cell, s.q, u, target, |n| lr.rate(n));
            s = next;
        }
    }
    Ok(table)
}
