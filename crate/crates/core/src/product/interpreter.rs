use std::io::Write;

use rand::Rng;

use super::{reward, Environment, ProductError, RewardConfig};
use crate::scltl::{Dfa, Letter};

/// Observation of the product: cell, automaton state and time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub cell: usize,
    pub q: usize,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStep {
    pub prior: ProductState,
    pub input: usize,
    pub next: ProductState,
    pub reward: f64,
    pub terminal: bool,
}

/// Time-dependent decision rule over product observations.
pub trait Policy {
    fn action(&self, k: usize, cell: usize, q: usize) -> usize;
}

impl<F: Fn(usize, usize, usize) -> usize> Policy for F {
    fn action(&self, k: usize, cell: usize, q: usize) -> usize {
        self(k, cell, q)
    }
}

/// Runs the automaton alongside an environment. The letter of the initial
/// observation is consumed at reset and one letter after every step, so a
/// full episode of `T` steps reads `T + 1` letters.
#[derive(Clone, Debug)]
pub struct Interpreter<'a, E> {
    env: E,
    dfa: &'a Dfa,
    reward: RewardConfig,
    horizon: usize,
    state: Option<ProductState>,
    start_q: usize,
    terminal: bool,
}

impl<'a, E: Environment> Interpreter<'a, E> {
    pub fn new(env: E, dfa: &'a Dfa, reward: RewardConfig, horizon: usize) -> Self {
        Interpreter {
            env,
            dfa,
            reward,
            horizon,
            state: None,
            start_q: dfa.initial(),
            terminal: true,
        }
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn dfa(&self) -> &Dfa {
        self.dfa
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    /// Reward of moving from the automaton's initial state on the letter
    /// read at the last reset; an episode that starts accepting earns its
    /// sparse reward here.
    pub fn reset_reward(&self) -> f64 {
        match self.state {
            Some(_) => reward(self.dfa.initial(), self.start_q, &self.reward, self.dfa),
            None => 0.0,
        }
    }

    pub fn state(&self) -> Option<ProductState> {
        self.state
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    fn ends(&self, q: usize, k: usize) -> bool {
        self.dfa.is_sink(q) || k >= self.horizon
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ProductState, ProductError> {
        self.reset_with_letter(rng).map(|(s, _)| s)
    }

    /// Like [`Interpreter::reset`] but also returns the letter read.
    pub fn reset_with_letter<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(ProductState, Letter), ProductError> {
        let (cell, letter) = self.env.reset(rng)?;
        let q = self.dfa.step(self.dfa.initial(), letter);
        let s = ProductState { cell, q, k: 0 };
        self.state = Some(s);
        self.start_q = q;
        self.terminal = self.ends(q, 0);
        Ok((s, letter))
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        rng: &mut R,
    ) -> Result<EpisodeStep, ProductError> {
        self.step_with_letter(input, rng).map(|(s, _)| s)
    }

    pub fn step_with_letter<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        rng: &mut R,
    ) -> Result<(EpisodeStep, Letter), ProductError> {
        let prior = match self.state {
            Some(s) if !self.terminal => s,
            _ => return Err(ProductError::TerminalStep),
        };
        let (cell, letter) = self.env.step(input, rng)?;
        let q = self.dfa.step(prior.q, letter);
        let next = ProductState {
            cell,
            q,
            k: prior.k + 1,
        };
        let r = reward(prior.q, q, &self.reward, self.dfa);
        self.terminal = self.ends(q, next.k);
        self.state = Some(next);
        Ok((
            EpisodeStep {
                prior,
                input,
                next,
                reward: r,
                terminal: self.terminal,
            },
            letter,
        ))
    }
}

/// Everything observed during one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub start: ProductState,
    /// Reward of the automaton move made on the letter read at reset.
    pub reset_reward: f64,
    pub steps: Vec<EpisodeStep>,
    /// Letters read, starting with the one consumed at reset.
    pub letters: Vec<Letter>,
}

impl Episode {
    pub fn end(&self) -> ProductState {
        self.steps.last().map_or(self.start, |s| s.next)
    }

    /// Reset reward plus step rewards.
    pub fn total_reward(&self) -> f64 {
        self.reset_reward + self.step_reward()
    }

    pub fn step_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// Whether the automaton ended in its accepting state.
    pub fn accepted(&self, dfa: &Dfa) -> bool {
        dfa.is_accepting(self.end().q)
    }
}

/// Plays `policy` until the interpreter reports termination.
pub fn run_episode<E, P, R>(
    interp: &mut Interpreter<'_, E>,
    policy: &P,
    rng: &mut R,
) -> Result<Episode, ProductError>
where
    E: Environment,
    P: Policy + ?Sized,
    R: Rng + ?Sized,
{
    let (start, first) = interp.reset_with_letter(rng)?;
    let mut steps = Vec::with_capacity(interp.horizon());
    let mut letters = vec![first];
    let mut s = start;
    while !interp.is_terminal() {
        let u = policy.action(s.k, s.cell, s.q);
        let (step, letter) = interp.step_with_letter(u, rng)?;
        s = step.next;
        steps.push(step);
        letters.push(letter);
    }
    let reset_reward = interp.reset_reward();
    Ok(Episode {
        start,
        reset_reward,
        steps,
        letters,
    })
}

/// CSV trace `episode,k,cell,q,input,reward,terminal`, one row per step.
pub fn write_trace<W: Write>(mut out: W, episodes: &[Episode]) -> std::io::Result<()> {
    writeln!(out, "episode,k,cell,q,input,reward,terminal")?;
    for (e, ep) in episodes.iter().enumerate() {
        for s in &ep.steps {
            writeln!(
                out,
                "{e},{},{},{},{},{},{}",
                s.prior.k, s.prior.cell, s.prior.q, s.input, s.reward, s.terminal as u8
            )?;
        }
    }
    Ok(())
}
