//! Reference semantics for scLTL on finite words, independent of the
//! derivative construction.
//!
//! A finite word `w` is a good prefix of `φ` when every infinite continuation
//! satisfies `φ`. Continuations are drawn from the family of lasso words
//! `u·v^ω` with `|u| ≤ stem` and `1 ≤ |v| ≤ loop`; on each lasso the formula is
//! evaluated with the textbook fixpoint semantics of `U`. Truth values for all
//! lassos are packed in a bitset so a single pass over the word computes the
//! verdict for every continuation at once.

use scrl::scltl::{Expr, Letter};

#[derive(Clone, Debug)]
struct Lasso {
    letters: Vec<u32>,
    loop_start: usize,
}

impl Lasso {
    fn succ(&self, i: usize) -> usize {
        if i + 1 == self.letters.len() {
            self.loop_start
        } else {
            i + 1
        }
    }
}

fn words(alphabet: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..alphabet).map(move |a| {
                    let mut w2 = w.clone();
                    w2.push(a);
                    w2
                })
            })
            .collect();
    }
    out
}

type Bits = Vec<u64>;

/// Postorder listing of a formula tree with child indices.
#[derive(Clone, Copy, Debug)]
enum Op {
    True,
    False,
    Lit(usize, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
}

fn flatten(e: &Expr, ops: &mut Vec<Op>) -> usize {
    let op = match e {
        Expr::True => Op::True,
        Expr::False => Op::False,
        Expr::Atom(p) => Op::Lit(*p, true),
        Expr::NegAtom(p) => Op::Lit(*p, false),
        Expr::And(l, r) => {
            let (l, r) = (flatten(l, ops), flatten(r, ops));
            Op::And(l, r)
        }
        Expr::Or(l, r) => {
            let (l, r) = (flatten(l, ops), flatten(r, ops));
            Op::Or(l, r)
        }
        Expr::Next(s) => Op::Next(flatten(s, ops)),
        Expr::Until(l, r) => {
            let (l, r) = (flatten(l, ops), flatten(r, ops));
            Op::Until(l, r)
        }
    };
    ops.push(op);
    ops.len() - 1
}

pub struct GoodPrefixOracle {
    alphabet: u32,
    lassos: Vec<Lasso>,
    blocks: usize,
}

impl GoodPrefixOracle {
    pub fn new(num_props: usize, stem: usize, loop_len: usize) -> Self {
        let alphabet = 1u32 << num_props;
        let mut lassos = Vec::new();
        for s in 0..=stem {
            for u in words(alphabet, s) {
                for l in 1..=loop_len {
                    for v in words(alphabet, l) {
                        let mut letters = u.clone();
                        letters.extend(&v);
                        lassos.push(Lasso {
                            letters,
                            loop_start: s,
                        });
                    }
                }
            }
        }
        let blocks = lassos.len().div_ceil(64);
        GoodPrefixOracle {
            alphabet,
            lassos,
            blocks,
        }
    }

    pub fn num_continuations(&self) -> usize {
        self.lassos.len()
    }

    /// Truth of every subformula at position 0 of every lasso.
    fn lasso_truth(&self, ops: &[Op]) -> Vec<Bits> {
        let mut out = vec![vec![0u64; self.blocks]; ops.len()];
        for (k, lasso) in self.lassos.iter().enumerate() {
            let n = lasso.letters.len();
            let mut val: Vec<Vec<bool>> = Vec::with_capacity(ops.len());
            for op in ops {
                let v: Vec<bool> = match *op {
                    Op::True => vec![true; n],
                    Op::False => vec![false; n],
                    Op::Lit(p, pos) => lasso
                        .letters
                        .iter()
                        .map(|&a| ((a >> p) & 1 == 1) == pos)
                        .collect(),
                    Op::And(l, r) => (0..n).map(|i| val[l][i] && val[r][i]).collect(),
                    Op::Or(l, r) => (0..n).map(|i| val[l][i] || val[r][i]).collect(),
                    Op::Next(s) => (0..n).map(|i| val[s][lasso.succ(i)]).collect(),
                    Op::Until(l, r) => {
                        // least fixpoint of U = r | (l & X U)
                        let mut u = vec![false; n];
                        for _ in 0..=n {
                            for i in (0..n).rev() {
                                u[i] = val[r][i] || (val[l][i] && u[lasso.succ(i)]);
                            }
                        }
                        u
                    }
                };
                val.push(v);
            }
            for (j, v) in val.iter().enumerate() {
                if v[0] {
                    out[j][k / 64] |= 1 << (k % 64);
                }
            }
        }
        out
    }

    fn full(&self) -> Bits {
        let mut b = vec![u64::MAX; self.blocks];
        let extra = self.blocks * 64 - self.lassos.len();
        if extra > 0 {
            b[self.blocks - 1] = u64::MAX >> extra;
        }
        b
    }

    /// Verdicts for every word of length `0..=max_len`, indexed by
    /// [`word_index`].
    pub fn good_prefixes(&self, expr: &Expr, max_len: usize) -> Vec<bool> {
        let mut ops = Vec::new();
        let root = flatten(expr, &mut ops);
        let nops = ops.len();
        let base = self.lasso_truth(&ops);
        let full = self.full();
        let zero = vec![0u64; self.blocks];
        let a = self.alphabet as usize;

        let nb = self.blocks;
        let stride = nops * nb;
        let is_full = |v: &[u64]| v == full.as_slice();
        // values of every op for words grown by prepending letters; one
        // contiguous record of `stride` words per finite word
        let mut layer: Vec<u64> = base.concat();
        let mut verdicts = vec![is_full(&layer[root * nb..(root + 1) * nb])];
        for _len in 1..=max_len {
            let tails = layer.len() / stride;
            let mut next_layer = vec![0u64; tails * a * stride];
            for letter in 0..a {
                for t in 0..tails {
                    let tail = &layer[t * stride..(t + 1) * stride];
                    let rec = (letter * tails + t) * stride;
                    let v = &mut next_layer[rec..rec + stride];
                    for (j, op) in ops.iter().enumerate() {
                        for b in 0..nb {
                            v[j * nb + b] = match *op {
                                Op::True => full[b],
                                Op::False => zero[b],
                                Op::Lit(p, pos) => {
                                    if ((letter >> p) & 1 == 1) == pos {
                                        full[b]
                                    } else {
                                        0
                                    }
                                }
                                Op::And(l, r) => v[l * nb + b] & v[r * nb + b],
                                Op::Or(l, r) => v[l * nb + b] | v[r * nb + b],
                                Op::Next(s) => tail[s * nb + b],
                                Op::Until(l, r) => {
                                    v[r * nb + b] | (v[l * nb + b] & tail[j * nb + b])
                                }
                            };
                        }
                    }
                    verdicts.push(is_full(&v[root * nb..(root + 1) * nb]));
                }
            }
            layer = next_layer;
        }
        verdicts
    }
}

/// Index of `word` in the order produced by [`GoodPrefixOracle::good_prefixes`]:
/// shorter words first; within a length the first letter varies slowest.
pub fn word_index(word: &[Letter], alphabet: usize) -> usize {
    let mut offset = 0;
    let mut size = 1;
    for _ in 0..word.len() {
        offset += size;
        size *= alphabet;
    }
    let mut idx = 0;
    for a in word {
        idx = idx * alphabet + a.index();
    }
    offset + idx
}

/// All words of length `0..=max_len` in [`word_index`] order.
pub fn all_words(alphabet: usize, max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        for w in words(alphabet as u32, len) {
            out.push(w.into_iter().map(Letter).collect());
        }
    }
    out
}

/// Every formula over `num_props` atoms of depth at most `max_depth`
/// (leaves have depth 1), with both operand orders of binary operators.
pub fn formulas_up_to_depth(num_props: usize, max_depth: usize) -> Vec<Expr> {
    let mut by_depth: Vec<Vec<Expr>> = vec![Vec::new()];
    let mut leaves = vec![Expr::True, Expr::False];
    for p in 0..num_props {
        leaves.push(Expr::Atom(p));
        leaves.push(Expr::NegAtom(p));
    }
    by_depth.push(leaves);
    for d in 2..=max_depth {
        let shallower: Vec<Expr> = by_depth[1..d].iter().flatten().cloned().collect();
        let exact = &by_depth[d - 1];
        let mut out = Vec::new();
        for e in exact {
            out.push(Expr::next(e.clone()));
        }
        for l in &shallower {
            for r in &shallower {
                if l.depth() != d - 1 && r.depth() != d - 1 {
                    continue;
                }
                out.push(Expr::and(l.clone(), r.clone()));
                out.push(Expr::or(l.clone(), r.clone()));
                out.push(Expr::until(l.clone(), r.clone()));
            }
        }
        by_depth.push(out);
    }
    by_depth.into_iter().flatten().collect()
}
