//! Seven-state single-track vehicle with tyre slip and a reach-avoid road
//! scenario.
//!
//! State: `x1, x2` position, `x3` steering angle, `x4` heading velocity,
//! `x5` yaw angle, `x6` yaw rate, `x7` slip angle. Inputs steer `x3` and
//! accelerate `x4`.

use super::{Dynamics, Labeler, StateBox, SystemError, SystemModel};
use crate::scltl::{Letter, Props};

/// Below this speed the kinematic branch is used.
pub const LOW_SPEED: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct BmwParams {
    pub wheelbase: f64,
    pub mass: f64,
    pub friction: f64,
    pub l_front: f64,
    pub l_rear: f64,
    pub h_cg: f64,
    pub inertia_z: f64,
    pub stiffness_front: f64,
    pub stiffness_rear: f64,
    pub gravity: f64,
    pub tau: f64,
    /// Steering-rate saturation interval.
    pub steer_limits: (f64, f64),
    /// Acceleration saturation interval.
    pub accel_limits: (f64, f64),
}

impl Default for BmwParams {
    fn default() -> Self {
        BmwParams {
            wheelbase: 2.5789,
            mass: 1093.3,
            friction: 1.0489,
            l_front: 1.156,
            l_rear: 1.422,
            h_cg: 0.574,
            inertia_z: 1791.6,
            stiffness_front: 20.89,
            stiffness_rear: 20.89,
            gravity: 9.81,
            tau: 0.001,
            steer_limits: (-0.4, 0.4),
            accel_limits: (-4.0, 4.0),
        }
    }
}

/// Which branch of the dynamics applies at speed `x4`.
pub fn is_low_speed(x4: f64) -> bool {
    x4.abs() < LOW_SPEED
}

/// Noise-free update written into `out`.
pub(super) fn drift(p: &BmwParams, x: &[f64], nu: &[f64], out: &mut [f64]) {
    let v1 = nu[0].clamp(p.steer_limits.0, p.steer_limits.1);
    let v2 = nu[1].clamp(p.accel_limits.0, p.accel_limits.1);
    let rates = rates(p, x, v1, v2);
    for i in 0..7 {
        out[i] = x[i] + p.tau * rates[i];
    }
}

/// Time derivatives `(a_i | b_i)` with saturated inputs in slots 3 and 4.
pub fn rates(p: &BmwParams, x: &[f64], v1: f64, v2: f64) -> [f64; 7] {
    let (x3, x4, x5, x6, x7) = (x[2], x[3], x[4], x[5], x[6]);
    let lwb = p.wheelbase;
    if is_low_speed(x4) {
        let c3 = x3.cos();
        [
            x4 * x5.cos(),
            x4 * x5.sin(),
            v1,
            v2,
            x4 / lwb * x3.tan(),
            v2 / lwb * x3.tan() + x4 / (lwb * c3 * c3) * v1,
            0.0,
        ]
    } else {
        let (lf, lr, g, h) = (p.l_front, p.l_rear, p.gravity, p.h_cg);
        let front = p.stiffness_front * (g * lr - v2 * h);
        let rear = p.stiffness_rear * (g * lf + v2 * h);
        let b6 = p.friction * p.mass / (p.inertia_z * (lr + lf))
            * (lf * front * x3 + (lr * rear - lf * front) * x7
                - (lf * lf * front + lr * lr * rear) * x6 / x4);
        let b7 = p.friction / (x4 * (lr + lf))
            * (front * x3 + (rear + front) * x7 - (lf * front - lr * rear) * x6 / x4)
            - x6;
        [
            x4 * (x5 + x7).cos(),
            x4 * (x5 + x7).sin(),
            v1,
            v2,
            x6,
            b6,
            b7,
        ]
    }
}

/// Axis-aligned rectangle in the road plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Rect {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    fn overlaps(&self, other: &Rect) -> bool {
        self.x_lo < other.x_hi
            && other.x_lo < self.x_hi
            && self.y_lo < other.y_hi
            && other.y_lo < self.y_hi
    }
}

/// Goal and obstacle regions together with the car body dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub goal: Rect,
    pub obstacle: Rect,
    pub car_length: f64,
    pub car_width: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            goal: Rect::new(44.0, 50.0, 3.0, 6.0),
            obstacle: Rect::new(30.0, 34.0, 0.0, 3.0),
            car_length: 4.508,
            car_width: 1.610,
        }
    }
}

impl Scenario {
    /// Corners of the body centred at `(cx, cy)` with heading `yaw`,
    /// counter-clockwise.
    pub fn footprint(&self, cx: f64, cy: f64, yaw: f64) -> [(f64, f64); 4] {
        let (s, c) = yaw.sin_cos();
        let (hl, hw) = (self.car_length / 2.0, self.car_width / 2.0);
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(dx, dy)| (cx + c * dx - s * dy, cy + s * dx + c * dy))
    }

    /// Closed-set intersection of the body with `rect` via separating axes.
    pub fn body_intersects(&self, cx: f64, cy: f64, yaw: f64, rect: &Rect) -> bool {
        let corners = self.footprint(cx, cy, yaw);
        let (xmin, xmax) = span(corners.iter().map(|c| c.0));
        let (ymin, ymax) = span(corners.iter().map(|c| c.1));
        if xmax < rect.x_lo || xmin > rect.x_hi || ymax < rect.y_lo || ymin > rect.y_hi {
            return false;
        }
        let rect_corners = [
            (rect.x_lo, rect.y_lo),
            (rect.x_hi, rect.y_lo),
            (rect.x_hi, rect.y_hi),
            (rect.x_lo, rect.y_hi),
        ];
        let (s, c) = yaw.sin_cos();
        for axis in [(c, s), (-s, c)] {
            let proj = |p: &(f64, f64)| p.0 * axis.0 + p.1 * axis.1;
            let (a_lo, a_hi) = span(corners.iter().map(proj));
            let (b_lo, b_hi) = span(rect_corners.iter().map(proj));
            if a_hi < b_lo || b_hi < a_lo {
                return false;
            }
        }
        true
    }

    pub fn label(&self, cx: f64, cy: f64, yaw: f64) -> Letter {
        let mut l = Letter::EMPTY;
        if self.body_intersects(cx, cy, yaw, &self.goal) {
            l = l.with(0);
        }
        if self.body_intersects(cx, cy, yaw, &self.obstacle) {
            l = l.with(1);
        }
        l
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Road and vehicle domain.
pub fn bmw_box() -> StateBox {
    StateBox::new(
        vec![0.0, 0.0, -0.18, 12.0, -0.5, -0.8, -0.1],
        vec![84.0, 6.0, 0.18, 21.0, 0.5, 0.8, 0.1],
    )
    .expect("static bounds")
}

/// `levels.0 × levels.1` uniform grid over the saturation box.
pub fn input_grid(p: &BmwParams, levels: (usize, usize)) -> Vec<Vec<f64>> {
    let axis = |(lo, hi): (f64, f64), n: usize| -> Vec<f64> {
        if n == 1 {
            vec![(lo + hi) / 2.0]
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    };
    let mut out = Vec::new();
    for a in axis(p.steer_limits, levels.0) {
        for b in axis(p.accel_limits, levels.1) {
            out.push(vec![a, b]);
        }
    }
    out
}

pub fn make_bmw(scenario: Scenario) -> Result<SystemModel, SystemError> {
    make_bmw_with(BmwParams::default(), scenario, (5, 5), 0.5)
}

pub fn make_bmw_with(
    params: BmwParams,
    scenario: Scenario,
    levels: (usize, usize),
    noise: f64,
) -> Result<SystemModel, SystemError> {
    let state_box = bmw_box();
    let road = Rect::new(
        state_box.lo()[0],
        state_box.hi()[0],
        state_box.lo()[1],
        state_box.hi()[1],
    );
    for (name, r) in [("goal", &scenario.goal), ("obstacle", &scenario.obstacle)] {
        let inside = r.x_lo < r.x_hi
            && r.y_lo < r.y_hi
            && road.x_lo <= r.x_lo
            && r.x_hi <= road.x_hi
            && road.y_lo <= r.y_lo
            && r.y_hi <= road.y_hi;
        if !inside {
            return Err(SystemError::Config(format!(
                "{name} rectangle must lie on the road"
            )));
        }
    }
    if scenario.goal.overlaps(&scenario.obstacle) {
        return Err(SystemError::Config("goal and obstacle overlap".into()));
    }
    if !(scenario.car_length > 0.0 && scenario.car_width > 0.0) {
        return Err(SystemError::Config(
            "car dimensions must be positive".into(),
        ));
    }
    if levels.0 == 0 || levels.1 == 0 {
        return Err(SystemError::EmptyInputs);
    }
    let inputs = input_grid(&params, levels);
    SystemModel::new(
        "bmw",
        state_box,
        inputs,
        vec![noise; 7],
        Props::new(["goal", "hit"]).expect("valid names"),
        Dynamics::Bmw(params),
        Labeler::ReachAvoid(scenario),
        None,
    )
}
