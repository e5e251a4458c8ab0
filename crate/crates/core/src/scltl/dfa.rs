use std::collections::VecDeque;
use std::fmt::Write as _;

use super::formula::{Letter, Props};

/// Co-safety automaton with a total transition table, a unique absorbing
/// accepting state and an optional absorbing rejecting state.
///
/// Every state carries `dist`, the length of the shortest word leading to the
/// accepting state; states that cannot reach it are assigned `d_max`, which
/// is one more than the largest finite distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    props: Props,
    letters: usize,
    table: Vec<usize>,
    initial: usize,
    accepting: usize,
    rejecting: Option<usize>,
    dist: Vec<u32>,
    d_max: u32,
}

impl Dfa {
    /// Assembles an automaton from a row-major `state × letter` table and
    /// computes distances.
    pub(crate) fn from_parts(
        props: Props,
        table: Vec<usize>,
        initial: usize,
        accepting: usize,
        rejecting: Option<usize>,
    ) -> Self {
        let letters = props.alphabet_size();
        debug_assert_eq!(table.len() % letters, 0);
        let mut dfa = Dfa {
            props,
            letters,
            table,
            initial,
            accepting,
            rejecting,
            dist: Vec::new(),
            d_max: 0,
        };
        dfa.compute_distances();
        dfa
    }

    fn compute_distances(&mut self) {
        let n = self.num_states();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for l in 0..self.letters {
                let t = self.table[q * self.letters + l];
                if preds[t].last() != Some(&q) {
                    preds[t].push(q);
                }
            }
        }
        let mut dist = vec![u32::MAX; n];
        dist[self.accepting] = 0;
        let mut queue = VecDeque::from([self.accepting]);
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q] {
                if dist[p] == u32::MAX {
                    dist[p] = dist[q] + 1;
                    queue.push_back(p);
                }
            }
        }
        let finite_max = dist
            .iter()
            .filter(|&&d| d != u32::MAX)
            .max()
            .copied()
            .unwrap_or(0);
        self.d_max = finite_max + 1;
        for d in &mut dist {
            if *d == u32::MAX {
                *d = self.d_max;
            }
        }
        self.dist = dist;
    }

    pub fn props(&self) -> &Props {
        &self.props
    }

    pub fn num_states(&self) -> usize {
        self.table.len() / self.letters
    }

    pub fn num_letters(&self) -> usize {
        self.letters
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn accepting(&self) -> usize {
        self.accepting
    }

    pub fn rejecting(&self) -> Option<usize> {
        self.rejecting
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        q == self.accepting
    }

    /// Accepting or rejecting sink.
    pub fn is_sink(&self, q: usize) -> bool {
        q == self.accepting || Some(q) == self.rejecting
    }

    pub fn dist(&self, q: usize) -> u32 {
        self.dist[q]
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    /// One transition. Letter bits beyond the proposition set are ignored.
    #[inline]
    pub fn step(&self, q: usize, letter: Letter) -> usize {
        let l = letter.index() & (self.letters - 1);
        self.table[q * self.letters + l]
    }

    /// Extended transition function: the state reached from `q` after `word`.
    pub fn run<'a, I>(&self, q: usize, word: I) -> usize
    where
        I: IntoIterator<Item = &'a Letter>,
    {
        word.into_iter().fold(q, |q, &a| self.step(q, a))
    }

    /// Whether some prefix of `word` drives the initial state into the
    /// accepting state.
    pub fn accepts(&self, word: &[Letter]) -> bool {
        let mut q = self.initial;
        if q == self.accepting {
            return true;
        }
        for &a in word {
            q = self.step(q, a);
            if q == self.accepting {
                return true;
            }
        }
        false
    }

    /// Graphviz rendering; nodes are labelled `q{i} [d=<dist>]` and the
    /// accepting state is double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph dfa {\n  rankdir=LR;\n  init [shape=point];\n");
        let _ = writeln!(out, "  init -> q{};", self.initial);
        for q in 0..self.num_states() {
            let shape = if q == self.accepting {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                out,
                "  q{q} [label=\"q{q} [d={}]\", shape={shape}];",
                self.dist[q]
            );
        }
        for q in 0..self.num_states() {
            let mut targets: Vec<(usize, Vec<Letter>)> = Vec::new();
            for l in 0..self.letters {
                let t = self.table[q * self.letters + l];
                match targets.iter_mut().find(|(d, _)| *d == t) {
                    Some((_, ls)) => ls.push(Letter(l as u32)),
                    None => targets.push((t, vec![Letter(l as u32)])),
                }
            }
            for (t, ls) in targets {
                let label = if ls.len() == self.letters {
                    "true".to_string()
                } else {
                    ls.iter()
                        .map(|&l| self.props.format_letter(l))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let _ = writeln!(out, "  q{q} -> q{t} [label=\"{label}\"];");
            }
        }
        out.push_str("}\n");
        out
    }

    /// Language-equivalent automaton with the fewest states (Hopcroft
    /// partition refinement). Sinks stay sinks; numbering follows first
    /// occurrence of each block in the original numbering.
    pub fn minimized(&self) -> Dfa {
        let n = self.num_states();
        let k = self.letters;
        let mut inverse: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
        for q in 0..n {
            for (l, inv) in inverse.iter_mut().enumerate() {
                inv[self.table[q * k + l]].push(q);
            }
        }

        let mut block_of = vec![0usize; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let non_acc: Vec<usize> = (0..n).filter(|&q| q != self.accepting).collect();
        blocks.push(vec![self.accepting]);
        if !non_acc.is_empty() {
            for &q in &non_acc {
                block_of[q] = 1;
            }
            blocks.push(non_acc);
        }
        let mut work: Vec<(usize, usize)> = (0..k).map(|l| (0, l)).collect();
        let mut in_work = vec![vec![false; k]; n.max(2)];
        for l in 0..k {
            in_work[0][l] = true;
        }

        while let Some((splitter, l)) = work.pop() {
            in_work[splitter][l] = false;
            let mut pre: Vec<usize> = blocks[splitter]
                .iter()
                .flat_map(|&t| inverse[l][t].iter().copied())
                .collect();
            pre.sort_unstable();
            pre.dedup();
            let mut touched: Vec<usize> = pre.iter().map(|&q| block_of[q]).collect();
            touched.sort_unstable();
            touched.dedup();
            for b in touched {
                let (inside, outside): (Vec<usize>, Vec<usize>) =
                    blocks[b].iter().partition(|q| pre.binary_search(q).is_ok());
                if inside.is_empty() || outside.is_empty() {
                    continue;
                }
                let new = blocks.len();
                let (keep, moved) = if inside.len() <= outside.len() {
                    (outside, inside)
                } else {
                    (inside, outside)
                };
                for &q in &moved {
                    block_of[q] = new;
                }
                blocks[b] = keep;
                blocks.push(moved);
                for c in 0..k {
                    if in_work[b][c] {
                        work.push((new, c));
                        in_work[new][c] = true;
                    } else {
                        let smaller = if blocks[b].len() <= blocks[new].len() {
                            b
                        } else {
                            new
                        };
                        if !in_work[smaller][c] {
                            work.push((smaller, c));
                            in_work[smaller][c] = true;
                        }
                    }
                }
            }
        }

        // renumber blocks by first member in original order
        let mut renum = vec![usize::MAX; blocks.len()];
        let mut next = 0;
        for q in 0..n {
            let b = block_of[q];
            if renum[b] == usize::MAX {
                renum[b] = next;
                next += 1;
            }
        }
        let mut table = vec![0usize; next * k];
        for q in 0..n {
            let nq = renum[block_of[q]];
            for l in 0..k {
                table[nq * k + l] = renum[block_of[self.table[q * k + l]]];
            }
        }
        let rejecting = self.rejecting.map(|r| renum[block_of[r]]);
        Dfa::from_parts(
            self.props.clone(),
            table,
            renum[block_of[self.initial]],
            renum[block_of[self.accepting]],
            rejecting,
        )
    }
}
