//! Brute-force path enumeration over an explicit MDP.

use scrl::quantize::FiniteMdp;
use scrl::scltl::{Dfa, Letter};

use super::oracle::word_index;

/// Expected sparse total reward and probability that the letter word is a
/// good prefix, summed over every successor sequence of length `horizon`.
///
/// The automaton is only used to feed `q` to the policy and to hand out the
/// sparse reward; acceptance comes from `verdicts`, indexed by
/// [`word_index`] over an alphabet of size `alphabet`.
pub struct PathTotals {
    pub sparse_reward: f64,
    pub acceptance: f64,
    pub paths: usize,
}

pub fn enumerate_paths<P>(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    start: usize,
    policy: P,
    verdicts: &[bool],
    alphabet: usize,
) -> PathTotals
where
    P: Fn(usize, usize, usize) -> usize,
{
    let mut totals = PathTotals {
        sparse_reward: 0.0,
        acceptance: 0.0,
        paths: 0,
    };
    let first = mdp.label(start);
    let q = dfa.step(dfa.initial(), first);
    let r = if q == dfa.accepting() { 1.0 } else { 0.0 };
    let mut word = vec![first];
    walk(
        mdp,
        dfa,
        horizon,
        &policy,
        verdicts,
        alphabet,
        0,
        start,
        q,
        1.0,
        r,
        &mut word,
        &mut totals,
    );
    totals
}

#[allow(clippy::too_many_arguments)]
fn walk<P: Fn(usize, usize, usize) -> usize>(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    policy: &P,
    verdicts: &[bool],
    alphabet: usize,
    k: usize,
    s: usize,
    q: usize,
    prob: f64,
    reward: f64,
    word: &mut Vec<Letter>,
    totals: &mut PathTotals,
) {
    if k == horizon {
        totals.paths += 1;
        totals.sparse_reward += prob * reward;
        if verdicts[word_index(word, alphabet)] {
            totals.acceptance += prob;
        }
        return;
    }
    let u = policy(k, s, q);
    for (t, &p) in mdp.row(s, u).iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let letter = mdp.label(t);
        let q2 = dfa.step(q, letter);
        let gain = if q != dfa.accepting() && q2 == dfa.accepting() {
            1.0
        } else {
            0.0
        };
        word.push(letter);
        walk(
            mdp,
            dfa,
            horizon,
            policy,
            verdicts,
            alphabet,
            k + 1,
            t,
            q2,
            prob * p,
            reward + gain,
            word,
            totals,
        );
        word.pop();
    }
}
