use super::ProductError;
use crate::scltl::Dfa;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewardMode {
    /// 1 on entering the accepting state, 0 otherwise.
    Sparse,
    /// Difference of distance-based potentials.
    Shaped,
}

impl std::str::FromStr for RewardMode {
    type Err = ProductError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sparse" => Ok(RewardMode::Sparse),
            "shaped" => Ok(RewardMode::Shaped),
            other => Err(ProductError::Config(format!(
                "unknown reward mode `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for RewardMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RewardMode::Sparse => "sparse",
            RewardMode::Shaped => "shaped",
        })
    }
}

pub const DEFAULT_KAPPA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    mode: RewardMode,
    kappa: f64,
}

impl RewardConfig {
    pub fn new(mode: RewardMode, kappa: f64) -> Result<Self, ProductError> {
        if mode == RewardMode::Shaped && !(kappa > 0.0 && kappa.is_finite()) {
            return Err(ProductError::Config(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(RewardConfig { mode, kappa })
    }

    pub fn sparse() -> Self {
        RewardConfig {
            mode: RewardMode::Sparse,
            kappa: DEFAULT_KAPPA,
        }
    }

    pub fn shaped(kappa: f64) -> Result<Self, ProductError> {
        Self::new(RewardMode::Shaped, kappa)
    }

    pub fn mode(&self) -> RewardMode {
        self.mode
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// `P(0) = 1` and `P(d) = κ(d − d(q0))/(1 − d_max)` otherwise; when
/// `d_max = 1` every positive distance gets potential 0.
pub fn potential(dfa: &Dfa, d: u32, kappa: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let d_max = dfa.d_max();
    if d_max <= 1 {
        return 0.0;
    }
    let d0 = dfa.dist(dfa.initial()) as f64;
    kappa * (d as f64 - d0) / (1.0 - d_max as f64)
}

/// Potential of automaton state `q`.
pub fn state_potential(dfa: &Dfa, q: usize, kappa: f64) -> f64 {
    potential(dfa, dfa.dist(q), kappa)
}

pub fn reward(q: usize, q_next: usize, config: &RewardConfig, dfa: &Dfa) -> f64 {
    match config.mode {
        RewardMode::Sparse => {
            if !dfa.is_accepting(q) && dfa.is_accepting(q_next) {
                1.0
            } else {
                0.0
            }
        }
        RewardMode::Shaped => {
            state_potential(dfa, q_next, config.kappa) - state_potential(dfa, q, config.kappa)
        }
    }
}
