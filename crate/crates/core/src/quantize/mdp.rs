use std::f64::consts::SQRT_2;
use std::io::Write;

use statrs::function::erf::erfc;

use super::{Grid, QuantizeError};
use crate::scltl::Letter;
use crate::system::{Dynamics, SystemModel};

/// Tolerance on row sums.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Explicit finite MDP over grid cells plus one absorbing, unlabelled
/// out-of-domain state (index `num_cells()`).
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMdp {
    cells: usize,
    inputs: usize,
    probs: Vec<f64>,
    labels: Vec<Letter>,
}

impl FiniteMdp {
    /// `rows` holds `cells × inputs` rows of length `cells + 1`, the last
    /// entry being the mass that leaves the domain. The absorbing out row is
    /// appended here.
    pub fn new(
        cells: usize,
        inputs: usize,
        mut rows: Vec<f64>,
        mut labels: Vec<Letter>,
    ) -> Result<Self, QuantizeError> {
        let width = cells + 1;
        if inputs == 0 || rows.len() != cells * inputs * width || labels.len() != cells {
            return Err(QuantizeError::Shape);
        }
        for s in 0..cells {
            for u in 0..inputs {
                let row = &rows[(s * inputs + u) * width..][..width];
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > ROW_TOLERANCE {
                    return Err(QuantizeError::RowNotNormalized {
                        state: s,
                        input: u,
                        sum,
                    });
                }
            }
        }
        for _ in 0..inputs {
            rows.extend((0..width).map(|t| if t == cells { 1.0 } else { 0.0 }));
        }
        labels.push(Letter::EMPTY);
        Ok(FiniteMdp {
            cells,
            inputs,
            probs: rows,
            labels,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    /// Cells plus the out state.
    pub fn num_states(&self) -> usize {
        self.cells + 1
    }

    pub fn out_state(&self) -> usize {
        self.cells
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs
    }

    /// Successor distribution of `(s, u)` over all states.
    #[inline]
    pub fn row(&self, s: usize, u: usize) -> &[f64] {
        let w = self.cells + 1;
        &self.probs[(s * self.inputs + u) * w..][..w]
    }

    pub fn prob(&self, s: usize, u: usize, t: usize) -> f64 {
        self.row(s, u)[t]
    }

    pub fn label(&self, s: usize) -> Letter {
        self.labels[s]
    }

    pub fn labels(&self) -> &[Letter] {
        &self.labels
    }

    /// CSV `state,input,next_state,prob` listing the nonzero entries.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,input,next_state,prob")?;
        for s in 0..self.num_states() {
            for u in 0..self.inputs {
                for (t, p) in self.row(s, u).iter().enumerate() {
                    if *p > 0.0 {
                        writeln!(out, "{s},{u},{t},{p}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Transition matrix of a scalar affine-Gaussian model on `grid`: cell `j`
/// receives `Φ((u_j − m)/σ) − Φ((l_j − m)/σ)` with `m = a·x_i + c` evaluated at
/// the representative point, and the remaining mass leaves the domain.
pub fn build_finite_mdp(model: &SystemModel, grid: &Grid) -> Result<FiniteMdp, QuantizeError> {
    let (coeff, offset) = match model.dynamics() {
        Dynamics::ScalarAffine { coeff, offset } if model.dim() == 1 => (coeff, offset),
        _ => return Err(QuantizeError::UnsupportedOracle(model.name().to_string())),
    };
    if grid.dim() != 1 {
        return Err(QuantizeError::Dimension {
            expected: 1,
            got: grid.dim(),
        });
    }
    let sigma = model.noise_scale()[0];
    let n = grid.num_cells();
    let m = model.num_inputs();
    let faces: Vec<f64> = (0..n)
        .map(|j| grid.bounds(0, j).0)
        .chain(std::iter::once(grid.hi()[0]))
        .collect();
    let mut rows = Vec::with_capacity(n * m * (n + 1));
    let mut labels = Vec::with_capacity(n);
    let mut cdf = vec![0.0; n + 1];
    for i in 0..n {
        let x = grid.center(i).expect("cell in range")[0];
        labels.push(model.label(Some(&[x])));
        for u in 0..m {
            let mean = coeff[u] * x + offset[u];
            for (c, f) in cdf.iter_mut().zip(&faces) {
                *c = phi((f - mean) / sigma);
            }
            let start = rows.len();
            rows.extend(cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)));
            let inside: f64 = rows[start..].iter().sum();
            rows.push((1.0 - inside).max(0.0));
        }
    }
    FiniteMdp::new(n, m, rows, labels)
}
