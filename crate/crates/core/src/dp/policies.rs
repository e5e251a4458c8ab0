use super::value::successor_table;
use super::DpError;
use crate::product::{reward, Policy, RewardConfig};
use crate::quantize::FiniteMdp;
use crate::scltl::Dfa;

/// Refuses enumerations with more policies than this.
pub const MAX_POLICIES: u64 = 1_000_000;

/// Stationary policy on the product: one input per `(cell, q)`.
///
/// Only cells of the MDP (not the absorbing out state) and non-sink
/// automaton states carry a free choice; everything else maps to input 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionalPolicy {
    automaton: usize,
    choices: Vec<usize>,
}

impl PositionalPolicy {
    pub fn choice(&self, s: usize, q: usize) -> usize {
        self.choices
            .get(s * self.automaton + q)
            .copied()
            .unwrap_or(0)
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }
}

impl Policy for PositionalPolicy {
    fn action(&self, _k: usize, cell: usize, q: usize) -> usize {
        self.choice(cell, q)
    }
}

/// `(cell, q)` pairs carrying a decision.
fn free_slots(mdp: &FiniteMdp, dfa: &Dfa) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in 0..mdp.num_cells() {
        for q in 0..dfa.num_states() {
            if !dfa.is_sink(q) {
                out.push((s, q));
            }
        }
    }
    out
}

/// `|U|^{slots}` or `None` on overflow.
pub fn policy_count(mdp: &FiniteMdp, dfa: &Dfa) -> Option<u64> {
    let slots = free_slots(mdp, dfa).len() as u32;
    (mdp.num_inputs() as u64).checked_pow(slots)
}

/// Expected total reward of `policy` from `start` over `T` steps, by
/// propagating the state distribution forward. Includes the reward of the
/// move made on the initial letter.
pub fn evaluate_policy<P: Policy + ?Sized>(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    start: usize,
    policy: &P,
    config: &RewardConfig,
) -> Result<f64, DpError> {
    let next_q = successor_table(mdp, dfa);
    evaluate_with(mdp, dfa, &next_q, horizon, start, policy, config)
}

fn evaluate_with<P: Policy + ?Sized>(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    next_q: &[usize],
    horizon: usize,
    start: usize,
    policy: &P,
    config: &RewardConfig,
) -> Result<f64, DpError> {
    let ns = mdp.num_states();
    let nq = dfa.num_states();
    if start >= ns {
        return Err(DpError::StartOutOfRange(start));
    }
    let q0 = dfa.step(dfa.initial(), mdp.label(start));
    let mut total = reward(dfa.initial(), q0, config, dfa);
    let mut mu = vec![0.0; ns * nq];
    mu[start * nq + q0] = 1.0;
    let mut next = vec![0.0; ns * nq];
    for k in 0..horizon {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut live = false;
        for s in 0..ns {
            for q in 0..nq {
                let m = mu[s * nq + q];
                if m == 0.0 || dfa.is_sink(q) {
                    continue;
                }
                live = true;
                let u = policy.action(k, s, q);
                if u >= mdp.num_inputs() {
                    return Err(DpError::InputOutOfRange(u));
                }
                for (t, p) in mdp.row(s, u).iter().enumerate() {
                    if *p == 0.0 {
                        continue;
                    }
                    let q2 = next_q[q * ns + t];
                    total += m * p * reward(q, q2, config, dfa);
                    next[t * nq + q2] += m * p;
                }
            }
        }
        if !live {
            break;
        }
        std::mem::swap(&mut mu, &mut next);
    }
    Ok(total)
}

/// Every positional policy with its expected total reward under `config`.
pub fn enumerate_policies(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    start: usize,
    config: &RewardConfig,
) -> Result<Vec<(PositionalPolicy, f64)>, DpError> {
    let count = policy_count(mdp, dfa).filter(|c| *c <= MAX_POLICIES);
    let count = count.ok_or(DpError::TooManyPolicies)?;
    let slots = free_slots(mdp, dfa);
    let nq = dfa.num_states();
    let nu = mdp.num_inputs();
    let next_q = successor_table(mdp, dfa);
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; slots.len()];
    for _ in 0..count {
        let mut choices = vec![0usize; mdp.num_states() * nq];
        for (&(s, q), &d) in slots.iter().zip(&digits) {
            choices[s * nq + q] = d;
        }
        let policy = PositionalPolicy {
            automaton: nq,
            choices,
        };
        let v = evaluate_with(mdp, dfa, &next_q, horizon, start, &policy, config)?;
        out.push((policy, v));
        for d in digits.iter_mut() {
            *d += 1;
            if *d < nu {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}

/// Tolerance for treating two expected rewards as equal.
pub const VALUE_TIE: f64 = 1e-12;

/// Outcome of comparing the optimal sets under sparse and shaped rewards.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapingReport {
    pub equivalent: bool,
    /// Best sparse value.
    pub p1: f64,
    /// Best sparse value strictly below `p1`, if any.
    pub p2: Option<f64>,
    /// Smallest shaped value among policies achieving `p1` minus the largest
    /// shaped value among policies achieving `p2`.
    pub shaped_gap: Option<f64>,
    /// A policy optimal under one reward but not the other, paired with one
    /// that is optimal under the other reward.
    pub witness: Option<(PositionalPolicy, PositionalPolicy)>,
}

/// Compares the sets of positional policies that are optimal under the
/// sparse reward and under the shaped reward with parameter `kappa`.
pub fn shaping_equivalence_check(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    start: usize,
    kappa: f64,
) -> Result<ShapingReport, DpError> {
    let sparse = enumerate_policies(mdp, dfa, horizon, start, &RewardConfig::sparse())?;
    let shaped_cfg = RewardConfig::shaped(kappa).map_err(|e| DpError::Config(e.to_string()))?;
    let shaped = enumerate_policies(mdp, dfa, horizon, start, &shaped_cfg)?;
    let p1 = sparse.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let s1 = shaped.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let p2 = sparse
        .iter()
        .map(|x| x.1)
        .filter(|v| *v < p1 - VALUE_TIE)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    let in_p = |v: f64| v >= p1 - VALUE_TIE;
    let in_s = |v: f64| v >= s1 - VALUE_TIE;
    let mut witness = None;
    for ((pol, pv), (_, sv)) in sparse.iter().zip(&shaped) {
        if in_p(*pv) != in_s(*sv) {
            let other = sparse
                .iter()
                .zip(&shaped)
                .find(|((_, p), (_, s))| if in_p(*pv) { in_s(*s) } else { in_p(*p) })
                .map(|((q, _), _)| q.clone())
                .unwrap_or_else(|| pol.clone());
            witness = Some((pol.clone(), other));
            break;
        }
    }

    let shaped_gap = p2.map(|p2| {
        let worst_top = sparse
            .iter()
            .zip(&shaped)
            .filter(|((_, p), _)| in_p(*p))
            .map(|(_, (_, s))| *s)
            .fold(f64::INFINITY, f64::min);
        let best_second = sparse
            .iter()
            .zip(&shaped)
            .filter(|((_, p), _)| (*p - p2).abs() <= VALUE_TIE)
            .map(|(_, (_, s))| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        worst_top - best_second
    });

    Ok(ShapingReport {
        equivalent: witness.is_none(),
        p1,
        p2,
        shaped_gap,
        witness,
    })
}
