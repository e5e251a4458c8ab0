use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scrl::system::{
    lipschitz_estimate, lipschitz_linear_gaussian, make_room_with, make_traffic_with,
    sample_transitions, RoomParams, TrafficParams, TrajectorySample,
};

fn room_no_heating() -> scrl::system::SystemModel {
    make_room_with(&RoomParams {
        inputs: vec![0.0],
        ..RoomParams::default()
    })
    .unwrap()
}

#[test]
fn estimate_tracks_closed_form() {
    let m = room_no_heating();
    let lg = m.linear_gaussian().unwrap();
    let exact = lipschitz_linear_gaussian(&lg.a_upper, &lg.sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = sample_transitions(&m, &[0], 10_000, &mut rng).unwrap();
    let est = lipschitz_estimate(&s, 20, None).unwrap();
    assert!(
        (est.value - exact).abs() / exact < 0.3,
        "estimate {} vs {exact}",
        est.value
    );
    assert_eq!(est.resolution, 20);
    assert!((est.fd_step - est.h_x.0[0] / 10.0).abs() < 1e-15);
}

#[test]
fn estimate_vanishes_without_state_dependence() {
    let m = make_traffic_with(&TrafficParams {
        tau: 0.0,
        q: 1.0,
        ..TrafficParams::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = sample_transitions(&m, &[0], 4000, &mut rng).unwrap();
    let est = lipschitz_estimate(&s, 10, None).unwrap();
    assert!(est.value < 0.05, "{}", est.value);
}

#[test]
fn refining_the_grid_never_lowers_the_estimate() {
    let m = room_no_heating();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = sample_transitions(&m, &[0], 2000, &mut rng).unwrap();
    let mut prev = 0.0;
    for r in [5, 10, 20, 40] {
        let est = lipschitz_estimate(&s, r, None).unwrap();
        assert!(est.value >= prev, "resolution {r}: {} < {prev}", est.value);
        prev = est.value;
    }
}

#[test]
fn estimate_rejects_empty_input() {
    let empty: Vec<TrajectorySample> = Vec::new();
    assert!(lipschitz_estimate(&empty, 10, None).is_err());
}

proptest! {
    #[test]
    fn affine_steps_are_deterministic(x in 19.0f64..21.0, u in 0usize..10, w in -3.0f64..3.0) {
        let m = make_room_with(&RoomParams::default()).unwrap();
        let a = m.step(&[x], u, &[w]).unwrap();
        let b = m.step(&[x], u, &[w]).unwrap();
        prop_assert_eq!(a[0].to_bits(), b[0].to_bits());
        let nu = m.inputs()[u][0];
        let hand = (1.0 - 0.022 - 0.05 * nu) * x + 2.5 * nu - 0.022 + 0.3162 * w;
        prop_assert!((a[0] - hand).abs() < 1e-12);
    }

    #[test]
    fn closed_form_scales(a in 0.01f64..3.0, s in 0.05f64..4.0) {
        let h = lipschitz_linear_gaussian(&[vec![a]], &[s]).unwrap();
        let h2 = lipschitz_linear_gaussian(&[vec![2.0 * a]], &[s]).unwrap();
        let h3 = lipschitz_linear_gaussian(&[vec![a]], &[2.0 * s]).unwrap();
        prop_assert!((h2 - 2.0 * h).abs() <= 1e-12 * h2);
        prop_assert!((h3 - h / 2.0).abs() <= 1e-12 * h);
    }
}
