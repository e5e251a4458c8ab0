use super::{Dynamics, Labeler, LinearGaussian, StateBox, SystemError, SystemModel};
use crate::scltl::Props;

/// Room temperature model `x' = (1 − 2η − β − γν)x + γT_hν + βT_e + σς`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoomParams {
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_outside: f64,
    pub t_heater: f64,
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
    pub inputs: Vec<f64>,
}

impl Default for RoomParams {
    fn default() -> Self {
        RoomParams {
            eta: 0.0,
            beta: 0.022,
            gamma: 0.05,
            t_outside: -1.0,
            t_heater: 50.0,
            sigma: 0.3162,
            lo: 19.0,
            hi: 21.0,
            inputs: vec![0.03, 0.09, 0.15, 0.21, 0.27, 0.33, 0.39, 0.45, 0.51, 0.57],
        }
    }
}

pub fn make_room() -> SystemModel {
    make_room_with(&RoomParams::default()).expect("default room parameters are valid")
}

pub fn make_room_with(p: &RoomParams) -> Result<SystemModel, SystemError> {
    let base = 1.0 - 2.0 * p.eta - p.beta;
    let coeff: Vec<f64> = p.inputs.iter().map(|nu| base - p.gamma * nu).collect();
    let offset = p
        .inputs
        .iter()
        .map(|nu| p.gamma * p.t_heater * nu + p.beta * p.t_outside)
        .collect();
    // bound on |a| over admissible inputs; ν = 0 gives the largest coefficient
    let a_upper = coeff.iter().fold(base.abs(), |m, a: &f64| m.max(a.abs()));
    SystemModel::new(
        "room",
        StateBox::new(vec![p.lo], vec![p.hi])?,
        p.inputs.iter().map(|v| vec![*v]).collect(),
        vec![p.sigma],
        Props::new(["safe"]).expect("valid name"),
        Dynamics::ScalarAffine { coeff, offset },
        Labeler::Safety,
        Some(LinearGaussian {
            a_upper: vec![vec![a_upper]],
            sigma: vec![p.sigma],
        }),
    )
}

/// Road traffic cell `x' = (1 − τv/l − q)x + 6ν + 3 + σς`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrafficParams {
    /// Sampling interval in hours.
    pub tau: f64,
    /// Flow speed in km/h.
    pub speed: f64,
    /// Cell length in km.
    pub length: f64,
    /// Exit ratio.
    pub q: f64,
    /// Vehicles entering through the controlled entry per interval.
    pub entry_gain: f64,
    /// Vehicles entering through the free entry per interval.
    pub inflow: f64,
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
    pub inputs: Vec<f64>,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            tau: 6.48 / 3600.0,
            speed: 100.0,
            length: 0.5,
            q: 0.25,
            entry_gain: 6.0,
            inflow: 3.0,
            sigma: 1.9494,
            lo: 0.0,
            hi: 20.0,
            inputs: vec![0.0, 1.0],
        }
    }
}

pub fn make_traffic() -> SystemModel {
    make_traffic_with(&TrafficParams::default()).expect("default traffic parameters are valid")
}

pub fn make_traffic_with(p: &TrafficParams) -> Result<SystemModel, SystemError> {
    let a = 1.0 - p.tau * p.speed / p.length - p.q;
    let coeff = vec![a; p.inputs.len()];
    let offset = p
        .inputs
        .iter()
        .map(|nu| p.entry_gain * nu + p.inflow)
        .collect();
    SystemModel::new(
        "traffic",
        StateBox::new(vec![p.lo], vec![p.hi])?,
        p.inputs.iter().map(|v| vec![*v]).collect(),
        vec![p.sigma],
        Props::new(["safe"]).expect("valid name"),
        Dynamics::ScalarAffine { coeff, offset },
        Labeler::Safety,
        Some(LinearGaussian {
            a_upper: vec![vec![a.abs()]],
            sigma: vec![p.sigma],
        }),
    )
}
