use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{QLearnError, QTable};
use crate::product::{
    reward, run_episode, ContinuousEnv, Environment, InitialState, Interpreter, Policy,
    ProductError, RewardConfig,
};
use crate::quantize::Grid;
use crate::scltl::{Dfa, Letter};
use crate::system::SystemModel;

/// Cell and letter observed when an episode starts at `x0`.
pub fn initial_observation(
    model: &SystemModel,
    grid: &Grid,
    x0: &[f64],
) -> Result<(usize, Letter), ProductError> {
    let mut env = ContinuousEnv::new(model, grid, InitialState::Fixed(x0.to_vec()))?;
    env.reset(&mut ChaCha8Rng::seed_from_u64(0))
}

/// Learned value of an episode whose first observation is `(cell, letter)`:
/// the reward of the reset move plus `max_ν Q[0]` at the reset state. An
/// episode born in a sink earns only the reset reward, so in sparse mode a
/// start inside the goal reports 1.
pub fn reported_value(table: &QTable, dfa: &Dfa, cell: usize, letter: Letter) -> f64 {
    let q = dfa.step(dfa.initial(), letter);
    let config = RewardConfig::new(table.meta.mode, table.meta.kappa)
        .unwrap_or_else(|_| RewardConfig::sparse());
    let r0 = reward(dfa.initial(), q, &config, dfa);
    if dfa.is_sink(q) || table.horizon() == 0 {
        r0
    } else {
        r0 + table.max_value(0, cell, q)
    }
}

/// Two-sided Hoeffding half-width at confidence `1 − fail`.
pub fn hoeffding_half_width(rollouts: u64, fail: f64) -> f64 {
    ((2.0 / fail).ln() / (2.0 * rollouts as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub estimate: f64,
    /// 99% Hoeffding half-width.
    pub half_width: f64,
    pub rollouts: u64,
    pub accepted: u64,
}

/// Fraction of `rollouts` independent episodes whose label word is
/// accepted. Rollout `i` draws from stream `i` of a generator seeded with
/// `seed`, so the estimate does not depend on how work is split across
/// threads.
pub fn evaluate<E, P>(
    env: &E,
    dfa: &Dfa,
    horizon: usize,
    policy: &P,
    rollouts: u64,
    seed: u64,
) -> Result<Evaluation, QLearnError>
where
    E: Environment + Clone + Sync,
    P: Policy + Sync + ?Sized,
{
    if rollouts == 0 {
        return Err(QLearnError::NoEpisodes);
    }
    let accepted = (0..rollouts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut interp = Interpreter::new(env.clone(), dfa, RewardConfig::sparse(), horizon);
            let ep = run_episode(&mut interp, policy, &mut rng)?;
            Ok(ep.accepted(dfa) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
        .map_err(|e: ProductError| QLearnError::from(e))?;
    Ok(Evaluation {
        estimate: accepted as f64 / rollouts as f64,
        half_width: hoeffding_half_width(rollouts, 0.01),
        rollouts,
        accepted,
    })
}
