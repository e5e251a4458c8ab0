use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::policies::policy_count;
use crate::quantize::FiniteMdp;
use crate::scltl::{compile, Dfa, Expr, Formula, Letter, Props};

/// Shape of generated instances.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceConfig {
    pub cells: RangeInclusive<usize>,
    pub inputs: usize,
    pub automaton_states: RangeInclusive<usize>,
    pub horizon: RangeInclusive<usize>,
    pub formula_depth: usize,
    pub max_policies: u64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            cells: 2..=5,
            inputs: 2,
            automaton_states: 3..=5,
            horizon: 1..=5,
            formula_depth: 3,
            max_policies: 1 << 12,
        }
    }
}

/// Small product instance for exhaustive checks.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub mdp: FiniteMdp,
    pub dfa: Dfa,
    pub formula: Expr,
    pub horizon: usize,
    pub start: usize,
}

fn random_expr<R: Rng + ?Sized>(rng: &mut R, props: usize, depth: usize) -> Expr {
    if depth <= 1 || rng.random_bool(0.25) {
        let p = rng.random_range(0..props);
        return match rng.random_range(0..6) {
            0 => Expr::True,
            1 => Expr::False,
            2 | 3 => Expr::Atom(p),
            _ => Expr::NegAtom(p),
        };
    }
    match rng.random_range(0..4) {
        0 => Expr::and(
            random_expr(rng, props, depth - 1),
            random_expr(rng, props, depth - 1),
        ),
        1 => Expr::or(
            random_expr(rng, props, depth - 1),
            random_expr(rng, props, depth - 1),
        ),
        2 => Expr::next(random_expr(rng, props, depth - 1)),
        _ => Expr::until(
            random_expr(rng, props, depth - 1),
            random_expr(rng, props, depth - 1),
        ),
    }
}

/// Probability vector drawn uniformly from the simplex.
fn dirichlet_row<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = g.iter().sum();
    g.into_iter().map(|v| v / total).collect()
}

/// Seeded instance over propositions `{a, b}`: uniform-simplex rows (the
/// out state included), uniformly random cell labels, and a random formula
/// whose automaton size lies in the configured range.
pub fn random_instance(seed: u64, config: &InstanceConfig) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let props = Props::new(["a", "b"]).expect("valid names");
    loop {
        let cells = rng.random_range(config.cells.clone());
        let mut rows = Vec::with_capacity(cells * config.inputs * (cells + 1));
        for _ in 0..cells * config.inputs {
            rows.extend(dirichlet_row(&mut rng, cells + 1));
        }
        let labels: Vec<Letter> = (0..cells).map(|_| Letter(rng.random_range(0..4))).collect();
        let mdp = FiniteMdp::new(cells, config.inputs, rows, labels).expect("normalized rows");
        let expr = random_expr(&mut rng, 2, config.formula_depth);
        let formula = Formula::new(expr.clone(), props.clone()).expect("atoms in range");
        let dfa = compile(&formula).expect("two propositions");
        if !config.automaton_states.contains(&dfa.num_states()) {
            continue;
        }
        if policy_count(&mdp, &dfa).is_none_or(|c| c > config.max_policies) {
            continue;
        }
        let horizon = rng.random_range(config.horizon.clone());
        let start = rng.random_range(0..cells);
        return RandomInstance {
            mdp,
            dfa,
            formula: expr,
            horizon,
            start,
        };
    }
}
