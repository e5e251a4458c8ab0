use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scrl::product::{
    run_episode, state_potential, write_trace, ContinuousEnv, FiniteMdpEnv, InitialState,
    Interpreter, ProductError, RewardConfig,
};
use scrl::quantize::{build_grid, FiniteMdp, Grid};
use scrl::scltl::{compile_str, Letter};
use scrl::system::{make_bmw, make_room, make_room_with, RoomParams, Scenario};

#[test]
fn reset_consumes_initial_label() {
    let m = make_room();
    let g = build_grid(m.state_box(), 0.1).unwrap();
    let dfa = compile_str("G[0,10] safe", m.props()).unwrap();
    let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![20.0])).unwrap();
    let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 10);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = it.reset(&mut rng).unwrap();
    assert_eq!(s.q, dfa.step(dfa.initial(), Letter(1)));
    assert_eq!(s.q, 1);
    assert_eq!(s.k, 0);
    assert_eq!(s.cell, g.cell_index(&[20.0]));
}

#[test]
fn outside_start_is_rejected() {
    let m = make_room();
    let g = build_grid(m.state_box(), 0.1).unwrap();
    assert!(matches!(
        ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![25.0])),
        Err(ProductError::OutsideDomain)
    ));
}

fn coarse_bmw_grid(m: &scrl::system::SystemModel, along: usize) -> Grid {
    Grid::with_counts(m.state_box(), vec![along, 2, 1, 1, 1, 1, 1]).unwrap()
}

#[test]
fn start_in_goal_is_accepting() {
    let m = make_bmw(Scenario::default()).unwrap();
    let g = coarse_bmw_grid(&m, 8);
    let dfa = compile_str("!hit U goal", m.props()).unwrap();
    // cell [42,52.5)×[3,6] has center (47.25, 4.5), inside the goal
    let x0 = vec![47.0, 4.5, 0.0, 16.0, 0.0, 0.0, 0.0];
    let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(x0)).unwrap();
    let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 10);
    let s = it.reset(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(dfa.is_accepting(s.q));
    assert!(it.is_terminal());
    assert_eq!(it.reset_reward(), 1.0);
    assert!(matches!(
        it.step(0, &mut ChaCha8Rng::seed_from_u64(0)),
        Err(ProductError::TerminalStep)
    ));
}

#[test]
fn label_is_taken_at_the_representative_point() {
    let m = make_bmw(Scenario::default()).unwrap();
    let g = coarse_bmw_grid(&m, 4);
    let dfa = compile_str("!hit U goal", m.props()).unwrap();
    // the body at x1 = 43 touches the goal, the body at the cell center 52.5
    // does not
    let x0 = vec![43.0, 4.5, 0.0, 16.0, 0.0, 0.0, 0.0];
    assert_eq!(m.label(Some(&x0)), Letter(1));
    let center = g.center(g.cell_index(&x0)).unwrap();
    assert_eq!(center[0], 52.5);
    assert_eq!(m.label(Some(&center)), Letter::EMPTY);
    let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(x0)).unwrap();
    let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 10);
    let s = it.reset(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(!dfa.is_accepting(s.q));
}

#[test]
fn full_horizon_reads_t_plus_one_letters() {
    let p = RoomParams {
        sigma: 1e-9,
        inputs: vec![0.308],
        ..RoomParams::default()
    };
    let m = make_room_with(&p).unwrap();
    let g = build_grid(m.state_box(), 0.1).unwrap();
    let dfa = compile_str("G[0,10] safe", m.props()).unwrap();
    let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![20.0])).unwrap();
    let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 10);
    let ep = run_episode(
        &mut it,
        &|_k: usize, _c: usize, _q: usize| 0,
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    assert_eq!(ep.steps.len(), 10);
    assert_eq!(ep.letters.len(), 11);
    assert!(ep.accepted(&dfa));
    assert_eq!(ep.total_reward(), 1.0);
    assert!(ep.steps[..9].iter().all(|s| !s.terminal && s.reward == 0.0));
    assert!(ep.steps[9].terminal);
}

/// Deterministic chain 0 → 1 → 2 → 3 with `goal` only in state 3.
fn chain_mdp() -> FiniteMdp {
    let mut rows = Vec::new();
    for s in 0..4 {
        let mut r = vec![0.0; 5];
        r[(s + 1).min(3)] = 1.0;
        rows.extend(r);
    }
    let labels = vec![Letter::EMPTY, Letter::EMPTY, Letter::EMPTY, Letter(1)];
    FiniteMdp::new(4, 1, rows, labels).unwrap()
}

#[test]
fn early_acceptance_ends_the_episode() {
    let mdp = chain_mdp();
    let dfa = compile_str("F[0,10] goal", &scrl::scltl::Props::new(["goal"]).unwrap()).unwrap();
    let env = FiniteMdpEnv::new(&mdp, 0).unwrap();
    let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 10);
    let ep = run_episode(
        &mut it,
        &|_: usize, _: usize, _: usize| 0,
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    assert_eq!(ep.steps.len(), 3);
    assert_eq!(ep.total_reward(), 1.0);
    let mut buf = Vec::new();
    write_trace(&mut buf, &[ep]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("episode,k,cell,q,input,reward,terminal\n0,0,0,"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.ends_with(",1,1\n"));
}

#[test]
fn replay_is_deterministic() {
    let m = make_room();
    let g = build_grid(m.state_box(), 0.05).unwrap();
    let dfa = compile_str("G[0,10] safe", m.props()).unwrap();
    let run = |seed| {
        let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![20.0])).unwrap();
        let mut it = Interpreter::new(env, &dfa, RewardConfig::shaped(0.1).unwrap(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50)
            .map(|_| {
                run_episode(
                    &mut it,
                    &|k: usize, c: usize, _q: usize| (k + c) % 10,
                    &mut rng,
                )
                .unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shaped_rewards_telescope(seed in any::<u64>(), x0 in 19.0f64..21.0, kappa in 0.01f64..1.0) {
        let m = make_room();
        let g = build_grid(m.state_box(), 0.1).unwrap();
        let dfa = compile_str("G[0,10] safe", m.props()).unwrap();
        let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![x0])).unwrap();
        let mut it = Interpreter::new(env, &dfa, RewardConfig::shaped(kappa).unwrap(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ep = run_episode(&mut it, &|k: usize, _c: usize, _q: usize| k % 10, &mut rng).unwrap();
        let expect = state_potential(&dfa, ep.end().q, kappa) - state_potential(&dfa, ep.start.q, kappa);
        prop_assert!((ep.step_reward() - expect).abs() <= 1e-12);
        let from_init = state_potential(&dfa, ep.end().q, kappa) - state_potential(&dfa, dfa.initial(), kappa);
        prop_assert!((ep.total_reward() - from_init).abs() <= 1e-12);
        if ep.accepted(&dfa) {
            prop_assert!((ep.step_reward() - (1.0 - state_potential(&dfa, ep.start.q, kappa))).abs() <= 1e-12);
        }
    }

    #[test]
    fn sparse_reward_matches_word_acceptance(seed in any::<u64>(), x0 in 19.0f64..21.0) {
        let m = make_room();
        let g = build_grid(m.state_box(), 0.1).unwrap();
        let dfa = compile_str("G[0,5] safe | (safe U X X !safe)", m.props()).unwrap();
        let env = ContinuousEnv::new(&m, &g, InitialState::Fixed(vec![x0])).unwrap();
        let mut it = Interpreter::new(env, &dfa, RewardConfig::sparse(), 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ep = run_episode(&mut it, &|_k: usize, c: usize, _q: usize| c % 10, &mut rng).unwrap();
        let total = ep.total_reward();
        prop_assert!(total == 0.0 || total == 1.0);
        prop_assert_eq!(total == 1.0, dfa.accepts(&ep.letters));
        prop_assert!(ep.letters.len() <= 9);
    }
}
