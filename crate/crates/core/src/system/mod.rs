//! Discrete-time stochastic control systems, the benchmark models and the
//! Lipschitz constant of their transition kernels.

mod benchmarks;
pub mod bmw;
pub mod lipschitz;
pub mod samples;

pub use benchmarks::{
    make_room, make_room_with, make_traffic, make_traffic_with, RoomParams, TrafficParams,
};
pub use bmw::{make_bmw, make_bmw_with, BmwParams, Rect, Scenario};
pub use lipschitz::{
    ckde_density, lipschitz_estimate, lipschitz_linear_gaussian, Bandwidth, LipschitzEstimate,
};
pub use samples::{read_samples, sample_transitions, write_samples, TrajectorySample};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scltl::{Letter, Props};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("state box is malformed: {0}")]
    InvalidBox(String),
    #[error("the input set is empty")]
    EmptyInputs,
    #[error("noise scale must be positive in every dimension")]
    NonPositiveNoise,
    #[error("standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("input index {index} outside an input set of size {size}")]
    InputOutOfRange { index: usize, size: usize },
    #[error("non-finite successor state")]
    NumericOverflow,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no samples recorded for the queried input")]
    NoSamplesForInput,
    #[error("kernel weights vanish at the query point")]
    DegenerateQuery,
    #[error("bandwidths and finite-difference steps must be positive")]
    InvalidBandwidth,
    #[error("sample file: {0}")]
    Samples(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned box `Π_i [lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl StateBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, SystemError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(SystemError::InvalidBox(
                "bounds must be nonempty and of equal length".into(),
            ));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(SystemError::InvalidBox(format!(
                    "dimension {i}: [{l}, {h}]"
                )));
            }
        }
        Ok(StateBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Uniform point inside the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| rng.random_range(*l..=*h))
            .collect()
    }
}

/// Deterministic part of the update map.
#[derive(Clone, Debug)]
pub enum Dynamics {
    /// `x' = a_u·x + c_u + noise`, one `(a_u, c_u)` pair per input.
    ScalarAffine {
        coeff: Vec<f64>,
        offset: Vec<f64>,
    },
    Bmw(BmwParams),
}

/// Maps states to letters over the model's propositions.
#[derive(Clone, Debug)]
pub enum Labeler {
    /// Single proposition true on the whole domain.
    Safety,
    /// `goal` and `hit` propositions from car-footprint intersections.
    ReachAvoid(Scenario),
}

/// Entry-wise bounds of the linear part and the noise deviations; this is
/// what the closed-form Lipschitz constant needs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGaussian {
    pub a_upper: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SystemModel {
    name: String,
    state_box: StateBox,
    inputs: Vec<Vec<f64>>,
    noise_scale: Vec<f64>,
    props: Props,
    dynamics: Dynamics,
    labeler: Labeler,
    linear_gaussian: Option<LinearGaussian>,
}

impl SystemModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        state_box: StateBox,
        inputs: Vec<Vec<f64>>,
        noise_scale: Vec<f64>,
        props: Props,
        dynamics: Dynamics,
        labeler: Labeler,
        linear_gaussian: Option<LinearGaussian>,
    ) -> Result<Self, SystemError> {
        let n = state_box.dim();
        if inputs.is_empty() {
            return Err(SystemError::EmptyInputs);
        }
        if noise_scale.len() != n {
            return Err(SystemError::Dimension {
                expected: n,
                got: noise_scale.len(),
            });
        }
        if noise_scale.iter().any(|s| !(*s > 0.0)) {
            return Err(SystemError::NonPositiveNoise);
        }
        let m = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|u| u.len() != m) {
            return Err(SystemError::Dimension {
                expected: m,
                got: bad.len(),
            });
        }
        match &dynamics {
            Dynamics::ScalarAffine { coeff, offset } => {
                if n != 1 {
                    return Err(SystemError::Dimension {
                        expected: 1,
                        got: n,
                    });
                }
                if coeff.len() != inputs.len() || offset.len() != inputs.len() {
                    return Err(SystemError::Config(
                        "affine coefficients must match the input set".into(),
                    ));
                }
            }
            Dynamics::Bmw(_) => {
                if n != 7 || m != 2 {
                    return Err(SystemError::Config(
                        "vehicle model is 7-D with 2 inputs".into(),
                    ));
                }
            }
        }
        Ok(SystemModel {
            name: name.into(),
            state_box,
            inputs,
            noise_scale,
            props,
            dynamics,
            labeler,
            linear_gaussian,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.state_box.dim()
    }

    pub fn state_box(&self) -> &StateBox {
        &self.state_box
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn noise_scale(&self) -> &[f64] {
        &self.noise_scale
    }

    pub fn props(&self) -> &Props {
        &self.props
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn labeler(&self) -> &Labeler {
        &self.labeler
    }

    pub fn linear_gaussian(&self) -> Option<&LinearGaussian> {
        self.linear_gaussian.as_ref()
    }

    /// `f(x, ν_input, ς)` where `noise` holds standard-normal draws; the
    /// per-dimension noise scale is applied here.
    pub fn step(&self, x: &[f64], input: usize, noise: &[f64]) -> Result<Vec<f64>, SystemError> {
        let mut out = vec![0.0; self.dim()];
        self.step_into(x, input, noise, &mut out)?;
        Ok(out)
    }

    pub fn step_into(
        &self,
        x: &[f64],
        input: usize,
        noise: &[f64],
        out: &mut [f64],
    ) -> Result<(), SystemError> {
        let n = self.dim();
        for len in [x.len(), noise.len(), out.len()] {
            if len != n {
                return Err(SystemError::Dimension {
                    expected: n,
                    got: len,
                });
            }
        }
        if input >= self.inputs.len() {
            return Err(SystemError::InputOutOfRange {
                index: input,
                size: self.inputs.len(),
            });
        }
        match &self.dynamics {
            Dynamics::ScalarAffine { coeff, offset } => {
                out[0] = coeff[input] * x[0] + offset[input];
            }
            Dynamics::Bmw(p) => bmw::drift(p, x, &self.inputs[input], out),
        }
        for ((o, s), w) in out.iter_mut().zip(&self.noise_scale).zip(noise) {
            *o += s * w;
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SystemError::NumericOverflow)
        }
    }

    /// Fills `noise` with i.i.d. standard-normal draws.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R, noise: &mut [f64]) {
        for w in noise.iter_mut() {
            *w = rng.sample(StandardNormal);
        }
    }

    /// Letter of a point; `None` is the out-of-domain symbol and carries no
    /// propositions. Points outside the box are treated the same way.
    pub fn label(&self, x: Option<&[f64]>) -> Letter {
        match x {
            Some(x) if self.state_box.contains(x) => match &self.labeler {
                Labeler::Safety => Letter::EMPTY.with(0),
                Labeler::ReachAvoid(scenario) => scenario.label(x[0], x[1], x[4]),
            },
            _ => Letter::EMPTY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_validation() {
        assert!(StateBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(StateBox::new(vec![], vec![]).is_err());
        let b = StateBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(b.contains(&[1.0, 2.0]));
        assert!(!b.contains(&[1.0, 2.1]));
    }

    #[test]
    fn noise_is_reproducible() {
        let m = make_room();
        let mut a = [0.0; 1];
        let mut b = [0.0; 1];
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            m.sample_noise(&mut r1, &mut a);
            m.sample_noise(&mut r2, &mut b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let m = make_traffic();
        assert!(matches!(
            m.step(&[f64::MAX], 1, &[f64::MAX]),
            Err(SystemError::NumericOverflow)
        ));
        assert!(matches!(
            m.step(&[0.0], 2, &[0.0]),
            Err(SystemError::InputOutOfRange { .. })
        ));
    }
}
