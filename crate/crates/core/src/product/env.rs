use rand::Rng;

use super::ProductError;
use crate::quantize::{FiniteMdp, Grid};
use crate::scltl::Letter;
use crate::system::SystemModel;

/// What the learner observes: a cell index (or the out token) and the letter
/// of that cell.
pub trait Environment {
    /// Number of cells; the out token is this value.
    fn num_cells(&self) -> usize;
    fn num_inputs(&self) -> usize;
    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(usize, Letter), ProductError>;
    fn step<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        rng: &mut R,
    ) -> Result<(usize, Letter), ProductError>;
}

/// Where episodes start.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Fixed(Vec<f64>),
    /// Uniform over the state box.
    Uniform,
}

/// The continuous system seen through the grid. The true state is kept here
/// and never exposed; letters are computed at the cell's representative
/// point. Leaving the box is absorbing.
#[derive(Clone, Debug)]
pub struct ContinuousEnv<'a> {
    model: &'a SystemModel,
    grid: &'a Grid,
    init: InitialState,
    x: Vec<f64>,
    out: bool,
    next: Vec<f64>,
    noise: Vec<f64>,
    center: Vec<f64>,
}

impl<'a> ContinuousEnv<'a> {
    pub fn new(
        model: &'a SystemModel,
        grid: &'a Grid,
        init: InitialState,
    ) -> Result<Self, ProductError> {
        let n = model.dim();
        if grid.dim() != n {
            return Err(ProductError::Config(
                "grid and model dimensions differ".into(),
            ));
        }
        if let InitialState::Fixed(x0) = &init {
            if !model.state_box().contains(x0) {
                return Err(ProductError::OutsideDomain);
            }
        }
        Ok(ContinuousEnv {
            model,
            grid,
            init,
            x: vec![0.0; n],
            out: false,
            next: vec![0.0; n],
            noise: vec![0.0; n],
            center: vec![0.0; n],
        })
    }

    /// Current continuous state, `None` once it has left the box.
    pub fn state(&self) -> Option<&[f64]> {
        (!self.out).then_some(self.x.as_slice())
    }

    pub fn model(&self) -> &SystemModel {
        self.model
    }

    fn observe(&mut self) -> (usize, Letter) {
        if self.out {
            return (self.grid.out_index(), Letter::EMPTY);
        }
        let cell = self.grid.cell_index(&self.x);
        if self.grid.center_into(cell, &mut self.center) {
            (cell, self.model.label(Some(&self.center)))
        } else {
            (cell, Letter::EMPTY)
        }
    }
}

impl Environment for ContinuousEnv<'_> {
    fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }

    fn num_inputs(&self) -> usize {
        self.model.num_inputs()
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(usize, Letter), ProductError> {
        match &self.init {
            InitialState::Fixed(x0) => self.x.copy_from_slice(x0),
            InitialState::Uniform => {
                let x = self.model.state_box().sample(rng);
                self.x.copy_from_slice(&x);
            }
        }
        self.out = false;
        Ok(self.observe())
    }

    fn step<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        rng: &mut R,
    ) -> Result<(usize, Letter), ProductError> {
        if input >= self.model.num_inputs() {
            return Err(ProductError::InputOutOfRange(input));
        }
        if !self.out {
            self.model.sample_noise(rng, &mut self.noise);
            self.model
                .step_into(&self.x, input, &self.noise, &mut self.next)?;
            std::mem::swap(&mut self.x, &mut self.next);
            self.out = !self.model.state_box().contains(&self.x);
        }
        Ok(self.observe())
    }
}

/// Samples successors from the explicit rows of a [`FiniteMdp`].
#[derive(Clone, Debug)]
pub struct FiniteMdpEnv<'a> {
    mdp: &'a FiniteMdp,
    start: usize,
    s: usize,
}

impl<'a> FiniteMdpEnv<'a> {
    pub fn new(mdp: &'a FiniteMdp, start: usize) -> Result<Self, ProductError> {
        if start >= mdp.num_states() {
            return Err(ProductError::OutsideDomain);
        }
        Ok(FiniteMdpEnv {
            mdp,
            start,
            s: start,
        })
    }
}

impl Environment for FiniteMdpEnv<'_> {
    fn num_cells(&self) -> usize {
        self.mdp.num_cells()
    }

    fn num_inputs(&self) -> usize {
        self.mdp.num_inputs()
    }

    fn reset<R: Rng + ?Sized>(&mut self, _rng: &mut R) -> Result<(usize, Letter), ProductError> {
        self.s = self.start;
        Ok((self.s, self.mdp.label(self.s)))
    }

    fn step<R: Rng + ?Sized>(
        &mut self,
        input: usize,
        rng: &mut R,
    ) -> Result<(usize, Letter), ProductError> {
        if input >= self.mdp.num_inputs() {
            return Err(ProductError::InputOutOfRange(input));
        }
        let row = self.mdp.row(self.s, input);
        let mut r: f64 = rng.random();
        // rounding leftovers land on the last state with positive mass
        let mut next = row.iter().rposition(|p| *p > 0.0).unwrap_or(self.s);
        for (t, p) in row.iter().enumerate() {
            if r < *p {
                next = t;
                break;
            }
            r -= p;
        }
        self.s = next;
        Ok((self.s, self.mdp.label(self.s)))
    }
}
