//! Formula-derivative construction of co-safety automata.
//!
//! Each automaton state is a residual obligation in disjunctive normal form:
//! a set of products, each product a set of terms, where a term is either a
//! literal over the current letter or a temporal obligation (`X φ` or
//! `φ U ψ`) that is a subformula of the input. Because every term comes from a
//! finite pool and sums/products are kept as sorted, deduplicated,
//! absorption-reduced sets, the reachable residuals are finite.
//!
//! After exploration, residuals that every infinite continuation discharges
//! are folded into the accepting sink and residuals that can never be
//! discharged are folded into the rejecting sink. The result accepts exactly
//! the good prefixes of the formula.

use std::collections::{HashMap, VecDeque};

use super::dfa::Dfa;
use super::formula::{Expr, Formula, Letter, MAX_PROPS};
use super::ScltlError;

type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(u8, bool),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Next(NodeId),
    Until(NodeId, NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Term {
    Lit(u8, bool),
    Obligation(NodeId),
}

type Product = Vec<Term>;
/// Sorted, absorption-free sum of products. `[]` is false, `[[]]` is true.
type Dnf = Vec<Product>;

fn dnf_true() -> Dnf {
    vec![Vec::new()]
}

fn is_true(d: &Dnf) -> bool {
    d.len() == 1 && d[0].is_empty()
}

fn is_subset(small: &[Term], big: &[Term]) -> bool {
    // both sorted
    let mut it = big.iter();
    small.iter().all(|t| it.any(|b| b == t))
}

fn normalize(mut products: Vec<Product>) -> Dnf {
    products.retain_mut(|p| {
        p.sort_unstable();
        p.dedup();
        // drop products containing p and !p
        !p.windows(2).any(|w| match (w[0], w[1]) {
            (Term::Lit(a, x), Term::Lit(b, y)) => a == b && x != y,
            _ => false,
        })
    });
    products.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    products.dedup();
    let mut kept: Vec<Product> = Vec::with_capacity(products.len());
    for p in products {
        // shorter products come first, so only earlier ones can absorb
        if !kept.iter().any(|k| is_subset(k, &p)) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

fn dnf_or(a: &Dnf, b: &Dnf) -> Dnf {
    if is_true(a) || is_true(b) {
        return dnf_true();
    }
    normalize(a.iter().chain(b.iter()).cloned().collect())
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            let mut r = p.clone();
            r.extend_from_slice(q);
            out.push(r);
        }
    }
    normalize(out)
}

struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
    dnf_cache: HashMap<NodeId, Dnf>,
    deriv_cache: HashMap<(NodeId, Letter), Dnf>,
}

impl Arena {
    fn new() -> Self {
        Arena {
            nodes: Vec::new(),
            index: HashMap::new(),
            dnf_cache: HashMap::new(),
            deriv_cache: HashMap::new(),
        }
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    fn add(&mut self, e: &Expr) -> NodeId {
        let node = match e {
            Expr::True => Node::True,
            Expr::False => Node::False,
            Expr::Atom(p) => Node::Lit(*p as u8, true),
            Expr::NegAtom(p) => Node::Lit(*p as u8, false),
            Expr::And(l, r) => Node::And(self.add(l), self.add(r)),
            Expr::Or(l, r) => Node::Or(self.add(l), self.add(r)),
            Expr::Next(s) => Node::Next(self.add(s)),
            Expr::Until(l, r) => Node::Until(self.add(l), self.add(r)),
        };
        self.intern(node)
    }

    /// The obligation expressed by `id` at the current position, without
    /// consuming a letter.
    fn to_dnf(&mut self, id: NodeId) -> Dnf {
        if let Some(d) = self.dnf_cache.get(&id) {
            return d.clone();
        }
        let d = match self.nodes[id as usize] {
            Node::True => dnf_true(),
            Node::False => Vec::new(),
            Node::Lit(p, pos) => vec![vec![Term::Lit(p, pos)]],
            Node::And(l, r) => {
                let (a, b) = (self.to_dnf(l), self.to_dnf(r));
                dnf_and(&a, &b)
            }
            Node::Or(l, r) => {
                let (a, b) = (self.to_dnf(l), self.to_dnf(r));
                dnf_or(&a, &b)
            }
            Node::Next(_) | Node::Until(..) => vec![vec![Term::Obligation(id)]],
        };
        self.dnf_cache.insert(id, d.clone());
        d
    }

    /// Residual of `id` after reading `letter`.
    fn derive(&mut self, id: NodeId, letter: Letter) -> Dnf {
        if let Some(d) = self.deriv_cache.get(&(id, letter)) {
            return d.clone();
        }
        let d = match self.nodes[id as usize] {
            Node::True => dnf_true(),
            Node::False => Vec::new(),
            Node::Lit(p, pos) => {
                if letter.contains(p as usize) == pos {
                    dnf_true()
                } else {
                    Vec::new()
                }
            }
            Node::And(l, r) => {
                let a = self.derive(l, letter);
                if a.is_empty() {
                    a
                } else {
                    let b = self.derive(r, letter);
                    dnf_and(&a, &b)
                }
            }
            Node::Or(l, r) => {
                let a = self.derive(l, letter);
                if is_true(&a) {
                    a
                } else {
                    let b = self.derive(r, letter);
                    dnf_or(&a, &b)
                }
            }
            Node::Next(s) => self.to_dnf(s),
            Node::Until(l, r) => {
                let now = self.derive(r, letter);
                if is_true(&now) {
                    now
                } else {
                    let hold = self.derive(l, letter);
                    let keep = dnf_and(&hold, &vec![vec![Term::Obligation(id)]]);
                    dnf_or(&now, &keep)
                }
            }
        };
        self.deriv_cache.insert((id, letter), d.clone());
        d
    }

    fn derive_term(&mut self, term: Term, letter: Letter) -> Dnf {
        match term {
            Term::Lit(p, pos) => {
                if letter.contains(p as usize) == pos {
                    dnf_true()
                } else {
                    Vec::new()
                }
            }
            Term::Obligation(id) => self.derive(id, letter),
        }
    }

    fn derive_state(&mut self, state: &Dnf, letter: Letter) -> Dnf {
        let mut acc: Dnf = Vec::new();
        for product in state {
            let mut conj = dnf_true();
            for &term in product {
                let d = self.derive_term(term, letter);
                conj = dnf_and(&conj, &d);
                if conj.is_empty() {
                    break;
                }
            }
            acc = dnf_or(&acc, &conj);
            if is_true(&acc) {
                break;
            }
        }
        acc
    }
}

/// Compiles a formula into its co-safety automaton.
pub fn compile(formula: &Formula) -> Result<Dfa, ScltlError> {
    let props = formula.props();
    if props.len() > MAX_PROPS {
        return Err(ScltlError::TooManyProps {
            count: props.len(),
            max: MAX_PROPS,
        });
    }
    let letters = props.alphabet_size();

    let mut arena = Arena::new();
    let root = arena.add(formula.expr());
    let init = arena.to_dnf(root);

    // explore residuals breadth-first
    let mut ids: HashMap<Dnf, usize> = HashMap::new();
    let mut residuals: Vec<Dnf> = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(init.clone(), 0);
    residuals.push(init);
    queue.push_back(0usize);
    while let Some(s) = queue.pop_front() {
        let state = residuals[s].clone();
        let mut row = Vec::with_capacity(letters);
        for l in 0..letters {
            let next = arena.derive_state(&state, Letter(l as u32));
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = residuals.len();
                    ids.insert(next.clone(), id);
                    residuals.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        raw.push(row);
    }
    let n = residuals.len();

    // valid residuals: least fixpoint of "every successor is valid", seeded with true
    let mut valid: Vec<bool> = residuals.iter().map(is_true).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !valid[s] && raw[s].iter().all(|&t| valid[t]) {
                valid[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // live residuals can still reach a valid one
    let mut live = valid.clone();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !live[s] && raw[s].iter().any(|&t| live[t]) {
                live[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // final numbering: undecided residuals in discovery order, then accept, then reject
    let mut map = vec![usize::MAX; n];
    let mut next_id = 0;
    for s in 0..n {
        if live[s] && !valid[s] {
            map[s] = next_id;
            next_id += 1;
        }
    }
    let acc = next_id;
    let has_rej = live.iter().any(|l| !l);
    let rej = has_rej.then_some(acc + 1);
    for s in 0..n {
        if valid[s] {
            map[s] = acc;
        } else if !live[s] {
            map[s] = acc + 1;
        }
    }
    let total = acc + 1 + usize::from(has_rej);
    let mut table = vec![0usize; total * letters];
    for s in 0..n {
        let q = map[s];
        for (l, &t) in raw[s].iter().enumerate() {
            table[q * letters + l] = map[t];
        }
    }
    for l in 0..letters {
        table[acc * letters + l] = acc;
        if let Some(r) = rej {
            table[r * letters + l] = r;
        }
    }

    Ok(Dfa::from_parts(props.clone(), table, map[0], acc, rej))
}
