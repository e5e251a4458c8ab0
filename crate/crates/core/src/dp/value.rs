use std::io::Write;

use rayon::prelude::*;

use super::DpError;
use crate::product::Policy;
use crate::quantize::FiniteMdp;
use crate::scltl::Dfa;

/// `next_q[q * states + t] = t(q, L(t))`.
pub(crate) fn successor_table(mdp: &FiniteMdp, dfa: &Dfa) -> Vec<usize> {
    let ns = mdp.num_states();
    let mut out = vec![0; dfa.num_states() * ns];
    for q in 0..dfa.num_states() {
        for t in 0..ns {
            out[q * ns + t] = dfa.step(q, mdp.label(t));
        }
    }
    out
}

/// Finite-horizon values `V[k](s, q)` for `k = 0..=T` and the greedy inputs
/// for `k < T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    states: usize,
    automaton: usize,
    horizon: usize,
    values: Vec<f64>,
    greedy: Vec<u32>,
}

impl ValueTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_automaton_states(&self) -> usize {
        self.automaton
    }

    pub fn value(&self, k: usize, s: usize, q: usize) -> f64 {
        self.values[(k * self.states + s) * self.automaton + q]
    }

    pub fn greedy(&self, k: usize, s: usize, q: usize) -> usize {
        self.greedy[(k * self.states + s) * self.automaton + q] as usize
    }

    /// CSV `k,cell,q,value,greedy_input`; the last time step has no input.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,cell,q,value,greedy_input")?;
        for k in 0..=self.horizon {
            for s in 0..self.states {
                for q in 0..self.automaton {
                    let v = self.value(k, s, q);
                    if k < self.horizon {
                        writeln!(out, "{k},{s},{q},{v},{}", self.greedy(k, s, q))?;
                    } else {
                        writeln!(out, "{k},{s},{q},{v},")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Policy for ValueTable {
    fn action(&self, k: usize, cell: usize, q: usize) -> usize {
        if k < self.horizon && cell < self.states && q < self.automaton {
            self.greedy(k, cell, q)
        } else {
            0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpSolution {
    /// Optimal probability of reading an accepted word within `T + 1` letters.
    pub p_star: f64,
    /// Automaton state after the initial letter.
    pub start_q: usize,
    pub table: ValueTable,
}

/// Backward recursion
/// `V[k](s, q) = max_ν Σ_{s'} T̂(s'|s, ν) · V[k+1](s', t(q, L(s')))` with
/// `V[·](s, q_acc) = 1` and `V[T](s, q) = [q = q_acc]`. Successors are summed
/// in index order and ties go to the lowest input, so results do not depend
/// on thread scheduling.
pub fn value_iteration(
    mdp: &FiniteMdp,
    dfa: &Dfa,
    horizon: usize,
    start: usize,
) -> Result<DpSolution, DpError> {
    let ns = mdp.num_states();
    let nq = dfa.num_states();
    let nu = mdp.num_inputs();
    if start >= ns {
        return Err(DpError::StartOutOfRange(start));
    }
    let acc = dfa.accepting();
    let next_q = successor_table(mdp, dfa);
    let slice = ns * nq;
    let mut values = vec![0.0; (horizon + 1) * slice];
    let mut greedy = vec![0u32; horizon * slice];
    for s in 0..ns {
        values[horizon * slice + s * nq + acc] = 1.0;
    }
    let mut w = vec![0.0; nq * ns];
    for k in (0..horizon).rev() {
        let (head, tail) = values.split_at_mut((k + 1) * slice);
        let later = &tail[..slice];
        for q in 0..nq {
            for t in 0..ns {
                w[q * ns + t] = later[t * nq + next_q[q * ns + t]];
            }
        }
        let now = &mut head[k * slice..];
        let g = &mut greedy[k * slice..(k + 1) * slice];
        now.par_chunks_mut(nq)
            .zip(g.par_chunks_mut(nq))
            .enumerate()
            .for_each(|(s, (vrow, grow))| {
                for q in 0..nq {
                    if q == acc {
                        vrow[q] = 1.0;
                        grow[q] = 0;
                        continue;
                    }
                    let wq = &w[q * ns..(q + 1) * ns];
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for u in 0..nu {
                        let v: f64 = mdp.row(s, u).iter().zip(wq).map(|(p, x)| p * x).sum();
                        if v > best {
                            best = v;
                            arg = u;
                        }
                    }
                    vrow[q] = best;
                    grow[q] = arg as u32;
                }
            });
    }
    let start_q = dfa.step(dfa.initial(), mdp.label(start));
    let p_star = values[start * nq + start_q];
    Ok(DpSolution {
        p_star,
        start_q,
        table: ValueTable {
            states: ns,
            automaton: nq,
            horizon,
            values,
            greedy,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scltl::{compile_str, Letter, Props};

    /// State 0 unlabelled, state 1 labelled `goal`; input 0 moves 0 → 1 with
    /// probability 0.7, input 1 does nothing.
    fn toy() -> FiniteMdp {
        let rows = vec![
            0.3, 0.7, 0.0, // s0, a
            1.0, 0.0, 0.0, // s0, b
            0.0, 1.0, 0.0, // s1, a
            0.0, 1.0, 0.0, // s1, b
        ];
        FiniteMdp::new(2, 2, rows, vec![Letter::EMPTY, Letter(1)]).unwrap()
    }

    fn goal(formula: &str) -> Dfa {
        compile_str(formula, &Props::new(["goal"]).unwrap()).unwrap()
    }

    #[test]
    fn toy_reachability() {
        let sol = value_iteration(&toy(), &goal("F[0,2] goal"), 2, 0).unwrap();
        assert!((sol.p_star - 0.91).abs() < 1e-12);
        assert_eq!(sol.table.greedy(0, 0, sol.start_q), 0);
        assert!((sol.table.value(1, 0, sol.start_q) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn accepting_values_pinned() {
        let dfa = goal("F[0,2] goal");
        let sol = value_iteration(&toy(), &dfa, 2, 0).unwrap();
        for k in 0..=2 {
            for s in 0..3 {
                assert_eq!(sol.table.value(k, s, dfa.accepting()), 1.0);
            }
        }
    }

    #[test]
    fn zero_horizon_is_initial_acceptance() {
        let dfa = goal("F[0,2] goal");
        assert_eq!(value_iteration(&toy(), &dfa, 0, 1).unwrap().p_star, 1.0);
        assert_eq!(value_iteration(&toy(), &dfa, 0, 0).unwrap().p_star, 0.0);
    }

    #[test]
    fn always_safe_is_certain() {
        let rows = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        let mdp = FiniteMdp::new(2, 1, rows, vec![Letter(1), Letter(1)]).unwrap();
        let dfa = goal("G[0,4] goal");
        assert_eq!(value_iteration(&mdp, &dfa, 4, 0).unwrap().p_star, 1.0);
    }

    #[test]
    fn csv_layout() {
        let sol = value_iteration(&toy(), &goal("F[0,1] goal"), 1, 0).unwrap();
        let mut buf = Vec::new();
        sol.table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,cell,q,value,greedy_input"));
        assert_eq!(
            text.lines().count(),
            1 + 2 * 3 * sol.table.num_automaton_states()
        );
        assert!(text.lines().last().unwrap().ends_with(','));
    }
}
