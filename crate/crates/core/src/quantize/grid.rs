use super::QuantizeError;
use crate::system::StateBox;

/// Refuses grids with more cells than this.
pub const MAX_CELLS: usize = 100_000_000;

/// Uniform partition of a state box into half-open cells; the upper face of
/// the box belongs to the last cell along each axis.
///
/// Cells are numbered row-major with the last dimension varying fastest.
/// Index `num_cells()` is the out-of-domain token.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    counts: Vec<usize>,
    widths: Vec<f64>,
    strides: Vec<usize>,
    cells: usize,
    delta: f64,
    delta_target: f64,
}

/// Result of quantizing a point.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantized {
    Cell { index: usize, center: Vec<f64> },
    Out,
}

/// Grid whose cell diameter does not exceed `delta_target`: each axis gets
/// intervals of width at most `delta_target / √n`.
pub fn build_grid(state_box: &StateBox, delta_target: f64) -> Result<Grid, QuantizeError> {
    if !(delta_target > 0.0 && delta_target.is_finite()) {
        return Err(QuantizeError::NonPositive("delta", delta_target));
    }
    let n = state_box.dim();
    let side = delta_target / (n as f64).sqrt();
    let counts = state_box
        .lo()
        .iter()
        .zip(state_box.hi())
        .map(|(l, h)| {
            let c = ((h - l) / side - 1e-9).ceil();
            if c > MAX_CELLS as f64 {
                Err(QuantizeError::TooManyCells(c))
            } else {
                Ok((c as usize).max(1))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Grid::build(state_box, counts, delta_target)
}

impl Grid {
    /// Grid with explicit per-axis interval counts.
    pub fn with_counts(state_box: &StateBox, counts: Vec<usize>) -> Result<Grid, QuantizeError> {
        if counts.len() != state_box.dim() {
            return Err(QuantizeError::Dimension {
                expected: state_box.dim(),
                got: counts.len(),
            });
        }
        if counts.contains(&0) {
            return Err(QuantizeError::NonPositive("interval count", 0.0));
        }
        let mut g = Grid::build(state_box, counts, f64::NAN)?;
        g.delta_target = g.delta;
        Ok(g)
    }

    fn build(
        state_box: &StateBox,
        counts: Vec<usize>,
        delta_target: f64,
    ) -> Result<Grid, QuantizeError> {
        let total = counts.iter().map(|&c| c as f64).product::<f64>();
        if total > MAX_CELLS as f64 {
            return Err(QuantizeError::TooManyCells(total));
        }
        let lo = state_box.lo().to_vec();
        let hi = state_box.hi().to_vec();
        let widths: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .zip(&counts)
            .map(|((l, h), &c)| (h - l) / c as f64)
            .collect();
        let mut strides = vec![1usize; counts.len()];
        for d in (0..counts.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * counts[d + 1];
        }
        let delta = widths.iter().map(|w| w * w).sum::<f64>().sqrt();
        Ok(Grid {
            lo,
            hi,
            counts,
            widths,
            strides,
            cells: total as usize,
            delta,
            delta_target,
        })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn out_index(&self) -> usize {
        self.cells
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Realized cell diameter.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta_target(&self) -> f64 {
        self.delta_target
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Interval index along axis `d`, or `None` outside `[lo_d, hi_d]`.
    #[inline]
    fn axis_index(&self, d: usize, v: f64) -> Option<usize> {
        if !(self.lo[d] <= v && v <= self.hi[d]) {
            return None;
        }
        let j = ((v - self.lo[d]) / self.widths[d]).floor() as usize;
        Some(j.min(self.counts[d] - 1))
    }

    /// Cell containing `x`, or [`Grid::out_index`].
    #[inline]
    pub fn cell_index(&self, x: &[f64]) -> usize {
        if x.len() != self.dim() {
            return self.cells;
        }
        let mut idx = 0;
        for (d, v) in x.iter().enumerate() {
            match self.axis_index(d, *v) {
                Some(j) => idx += j * self.strides[d],
                None => return self.cells,
            }
        }
        idx
    }

    /// Per-axis interval indices of a cell.
    pub fn multi_index(&self, cell: usize) -> Option<Vec<usize>> {
        if cell >= self.cells {
            return None;
        }
        Some(
            self.strides
                .iter()
                .zip(&self.counts)
                .map(|(s, c)| (cell / s) % c)
                .collect(),
        )
    }

    /// Representative point (cell center).
    pub fn center(&self, cell: usize) -> Option<Vec<f64>> {
        let mi = self.multi_index(cell)?;
        Some(
            mi.iter()
                .enumerate()
                .map(|(d, &j)| self.lo[d] + (j as f64 + 0.5) * self.widths[d])
                .collect(),
        )
    }

    /// Writes the representative point of `cell` into `out`; returns false
    /// for the out-of-domain token.
    pub fn center_into(&self, cell: usize, out: &mut [f64]) -> bool {
        if cell >= self.cells {
            return false;
        }
        for d in 0..self.dim() {
            let j = (cell / self.strides[d]) % self.counts[d];
            out[d] = self.lo[d] + (j as f64 + 0.5) * self.widths[d];
        }
        true
    }

    /// Lower and upper faces of cell `j` along axis `d`.
    pub fn bounds(&self, d: usize, j: usize) -> (f64, f64) {
        let l = self.lo[d] + j as f64 * self.widths[d];
        let u = if j + 1 == self.counts[d] {
            self.hi[d]
        } else {
            self.lo[d] + (j + 1) as f64 * self.widths[d]
        };
        (l, u)
    }

    pub fn quantize(&self, x: &[f64]) -> Quantized {
        let index = self.cell_index(x);
        match self.center(index) {
            Some(center) => Quantized::Cell { index, center },
            None => Quantized::Out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room_box() -> StateBox {
        StateBox::new(vec![19.0], vec![21.0]).unwrap()
    }

    #[test]
    fn room_grid() {
        let g = build_grid(&room_box(), 0.01).unwrap();
        assert_eq!(g.num_cells(), 200);
        assert!((g.widths()[0] - 0.01).abs() < 1e-15);
        match g.quantize(&[19.004]) {
            Quantized::Cell { index, center } => {
                assert_eq!(index, 0);
                assert!((center[0] - 19.005).abs() < 1e-12);
            }
            Quantized::Out => panic!(),
        }
        match g.quantize(&[21.0]) {
            Quantized::Cell { index, center } => {
                assert_eq!(index, 199);
                assert!((center[0] - 20.995).abs() < 1e-12);
            }
            Quantized::Out => panic!(),
        }
        assert_eq!(g.quantize(&[25.0]), Quantized::Out);
        assert_eq!(g.cell_index(&[18.99]), g.out_index());
    }

    #[test]
    fn traffic_grid() {
        let b = StateBox::new(vec![0.0], vec![20.0]).unwrap();
        assert_eq!(build_grid(&b, 0.2).unwrap().num_cells(), 100);
    }

    #[test]
    fn four_dim_unit_box() {
        let b = StateBox::new(vec![0.0; 4], vec![1.0; 4]).unwrap();
        let g = build_grid(&b, 1.0).unwrap();
        assert!(g.counts().iter().all(|&c| c >= 2));
        assert!(g.widths().iter().all(|&w| w <= 0.5));
        assert!(g.delta() <= 1.0);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(
            build_grid(&room_box(), 0.0),
            Err(QuantizeError::NonPositive(..))
        ));
        let b = StateBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(matches!(
            build_grid(&b, 1e-3),
            Err(QuantizeError::TooManyCells(_))
        ));
    }

    #[test]
    fn multi_index_round_trip() {
        let b = StateBox::new(vec![0.0, 0.0], vec![3.0, 2.0]).unwrap();
        let g = Grid::with_counts(&b, vec![3, 2]).unwrap();
        for c in 0..g.num_cells() {
            let center = g.center(c).unwrap();
            assert_eq!(g.cell_index(&center), c);
        }
        assert_eq!(g.cell_index(&[2.5, 0.5]), 4);
        assert_eq!(g.bounds(0, 2), (2.0, 3.0));
    }
}
