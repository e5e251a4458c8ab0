//! Lipschitz constant of the conditional density `t_x(x'|x, ν)` in `x`.

use std::f64::consts::PI;

use super::{SystemError, TrajectorySample};

/// Closed form for `x' = Ax + Bν + diag(σ)ς` with standard-normal `ς`:
/// `H = Σ_{i,j} 2|a_ij| / (σ_i √(2π))`.
pub fn lipschitz_linear_gaussian(a_upper: &[Vec<f64>], sigma: &[f64]) -> Result<f64, SystemError> {
    if a_upper.len() != sigma.len() {
        return Err(SystemError::Dimension {
            expected: sigma.len(),
            got: a_upper.len(),
        });
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(SystemError::NonPositiveSigma(*s));
    }
    let root = (2.0 * PI).sqrt();
    Ok(a_upper
        .iter()
        .zip(sigma)
        .map(|(row, s)| row.iter().map(|a| 2.0 * a.abs() / (s * root)).sum::<f64>())
        .sum())
}

/// Per-dimension kernel bandwidths.
#[derive(Clone, Debug, PartialEq)]
pub struct Bandwidth(pub Vec<f64>);

impl Bandwidth {
    pub fn uniform(h: f64, dim: usize) -> Self {
        Bandwidth(vec![h; dim])
    }

    /// Rule of thumb `1.06 σ̂ N^{-1/5}` applied per dimension.
    pub fn silverman<'a>(points: impl Iterator<Item = &'a [f64]>) -> Result<Self, SystemError> {
        let pts: Vec<&[f64]> = points.collect();
        let n = pts.len();
        if n < 2 {
            return Err(SystemError::InvalidBandwidth);
        }
        let dim = pts[0].len();
        let factor = 1.06 * (n as f64).powf(-0.2);
        let mut out = Vec::with_capacity(dim);
        for d in 0..dim {
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / n as f64;
            let var = pts.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            out.push(factor * var.sqrt());
        }
        let bw = Bandwidth(out);
        bw.validate()?;
        Ok(bw)
    }

    fn validate(&self) -> Result<(), SystemError> {
        if self.0.is_empty() || self.0.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            Err(SystemError::InvalidBandwidth)
        } else {
            Ok(())
        }
    }

    /// `Π_d K((y_d − c_d)/h_d)/h_d` for the standard normal `K`.
    fn product_kernel(&self, y: &[f64], c: &[f64]) -> f64 {
        let mut log = 0.0;
        let mut scale = 1.0;
        for ((v, m), h) in y.iter().zip(c).zip(&self.0) {
            let z = (v - m) / h;
            log -= 0.5 * z * z;
            scale /= h * (2.0 * PI).sqrt();
        }
        scale * log.exp()
    }

    /// `−‖(y − c)/h‖² / 2`, the log of the unnormalised radial kernel.
    fn log_radial(&self, y: &[f64], c: &[f64]) -> f64 {
        -0.5 * y
            .iter()
            .zip(c)
            .zip(&self.0)
            .map(|((v, m), h)| ((v - m) / h).powi(2))
            .sum::<f64>()
    }
}

fn samples_for<'a>(samples: &'a [TrajectorySample], nu: &[f64]) -> Vec<&'a TrajectorySample> {
    samples.iter().filter(|s| s.nu == nu).collect()
}

/// Normalised Nadaraya–Watson weights at `x`; the common kernel constant
/// cancels, and shifting by the largest exponent keeps far queries finite.
fn weights(
    group: &[&TrajectorySample],
    h_x: &Bandwidth,
    x: &[f64],
) -> Result<Vec<f64>, SystemError> {
    let logs: Vec<f64> = group.iter().map(|s| h_x.log_radial(x, &s.x)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(SystemError::DegenerateQuery);
    }
    let mut w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(SystemError::DegenerateQuery);
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Conditional kernel density estimate
/// `Σ_i K_{h1}(x' − x'_i) K_{h2}(‖x − x_i‖) / Σ_i K_{h2}(‖x − x_i‖)` over the
/// samples recorded with input `nu`.
pub fn ckde_density(
    samples: &[TrajectorySample],
    h_xp: &Bandwidth,
    h_x: &Bandwidth,
    xp: &[f64],
    x: &[f64],
    nu: &[f64],
) -> Result<f64, SystemError> {
    h_xp.validate()?;
    h_x.validate()?;
    let group = samples_for(samples, nu);
    if group.is_empty() {
        return Err(SystemError::NoSamplesForInput);
    }
    let w = weights(&group, h_x, x)?;
    Ok(group
        .iter()
        .zip(&w)
        .map(|(s, wi)| wi * h_xp.product_kernel(xp, &s.xp))
        .sum())
}

/// Result of [`lipschitz_estimate`]; the value is a numerical estimate, not a
/// certified bound.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub resolution: usize,
    pub fd_step: f64,
    pub h_xp: Bandwidth,
    pub h_x: Bandwidth,
}

/// Largest grid entries beyond which the estimate refuses to run.
const MAX_GRID_WORK: f64 = 5e9;

fn grid_axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    (0..=resolution)
        .map(|i| lo + (hi - lo) * (i as f64 / resolution as f64))
        .collect()
}

fn grid_points(lo: &[f64], hi: &[f64], resolution: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for (l, h) in lo.iter().zip(hi) {
        let axis = grid_axis(*l, *h, resolution);
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

fn bounds<'a>(points: impl Iterator<Item = &'a [f64]>, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Maximum over a grid of `(x', x, ν)` of the Euclidean norm of the central
/// finite-difference gradient of [`ckde_density`] in `x`.
///
/// The grid spans the bounding boxes of the sample states and successors
/// with `resolution` intervals per dimension, so doubling the resolution
/// refines the grid. Bandwidths follow the rule of thumb; the default
/// finite-difference step is a tenth of the smallest state bandwidth.
pub fn lipschitz_estimate(
    samples: &[TrajectorySample],
    resolution: usize,
    fd_step: Option<f64>,
) -> Result<LipschitzEstimate, SystemError> {
    if samples.is_empty() {
        return Err(SystemError::NoSamplesForInput);
    }
    if resolution == 0 {
        return Err(SystemError::Config(
            "grid resolution must be positive".into(),
        ));
    }
    let n = samples[0].x.len();
    let h_x = Bandwidth::silverman(samples.iter().map(|s| s.x.as_slice()))?;
    let h_xp = Bandwidth::silverman(samples.iter().map(|s| s.xp.as_slice()))?;
    let step =
        fd_step.unwrap_or_else(|| h_x.0.iter().copied().fold(f64::INFINITY, f64::min) / 10.0);
    if !(step > 0.0 && step.is_finite()) {
        return Err(SystemError::InvalidBandwidth);
    }
    let side = (resolution + 1) as f64;
    let work = side.powi(2 * n as i32) * samples.len() as f64 * n as f64;
    if work > MAX_GRID_WORK {
        return Err(SystemError::Config(format!(
            "estimation grid too large ({work:.3e} kernel evaluations)"
        )));
    }

    let (x_lo, x_hi) = bounds(samples.iter().map(|s| s.x.as_slice()), n);
    let (xp_lo, xp_hi) = bounds(samples.iter().map(|s| s.xp.as_slice()), n);
    let x_grid = grid_points(&x_lo, &x_hi, resolution);
    let xp_grid = grid_points(&xp_lo, &xp_hi, resolution);

    let mut inputs: Vec<&[f64]> = Vec::new();
    for s in samples {
        if !inputs.contains(&s.nu.as_slice()) {
            inputs.push(&s.nu);
        }
    }

    let mut best = 0.0f64;
    for nu in inputs {
        let group = samples_for(samples, nu);
        // kernel values K_{h1}(x' − x'_i) for every grid x'
        let kxp: Vec<Vec<f64>> = xp_grid
            .iter()
            .map(|xp| {
                group
                    .iter()
                    .map(|s| h_xp.product_kernel(xp, &s.xp))
                    .collect()
            })
            .collect();
        for x in &x_grid {
            let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(n);
            for d in 0..n {
                let mut up = x.clone();
                let mut down = x.clone();
                up[d] += step;
                down[d] -= step;
                let wu = weights(&group, &h_x, &up)?;
                let wd = weights(&group, &h_x, &down)?;
                diffs.push(
                    wu.iter()
                        .zip(&wd)
                        .map(|(a, b)| (a - b) / (2.0 * step))
                        .collect(),
                );
            }
            for row in &kxp {
                let norm = diffs
                    .iter()
                    .map(|dw| row.iter().zip(dw).map(|(k, w)| k * w).sum::<f64>().powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.max(norm);
            }
        }
    }
    Ok(LipschitzEstimate {
        value: best,
        resolution,
        fd_step: step,
        h_xp,
        h_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let room = lipschitz_linear_gaussian(&[vec![0.978]], &[0.3162]).unwrap();
        assert!((room - 2.4678).abs() < 5e-5);
        let traffic = lipschitz_linear_gaussian(&[vec![0.39]], &[1.9494]).unwrap();
        assert!((traffic - 0.15963).abs() < 5e-6);
        let eye =
            lipschitz_linear_gaussian(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0]).unwrap();
        assert!((eye - 4.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!((eye - 1.59577).abs() < 5e-6);
    }

    #[test]
    fn closed_form_rejects_bad_sigma() {
        assert!(matches!(
            lipschitz_linear_gaussian(&[vec![1.0]], &[0.0]),
            Err(SystemError::NonPositiveSigma(_))
        ));
    }

    #[test]
    fn closed_form_homogeneity() {
        let a = vec![vec![0.3, -0.2], vec![0.1, 0.5]];
        let s = [0.7, 1.3];
        let h = lipschitz_linear_gaussian(&a, &s).unwrap();
        let a2: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().map(|v| 2.0 * v).collect())
            .collect();
        let s2 = [1.4, 2.6];
        assert!((lipschitz_linear_gaussian(&a2, &s).unwrap() - 2.0 * h).abs() < 1e-12);
        assert!((lipschitz_linear_gaussian(&a, &s2).unwrap() - h / 2.0).abs() < 1e-12);
    }

    fn sample(x: f64, nu: f64, xp: f64) -> TrajectorySample {
        TrajectorySample {
            x: vec![x],
            nu: vec![nu],
            xp: vec![xp],
        }
    }

    #[test]
    fn single_sample_density() {
        let s = [sample(1.0, 0.5, 2.0)];
        let h = Bandwidth::uniform(1.0, 1);
        let v = ckde_density(&s, &h, &h, &[2.0], &[1.0], &[0.5]).unwrap();
        assert!((v - 0.39894).abs() < 5e-6);
        assert!(matches!(
            ckde_density(&s, &h, &h, &[2.0], &[1.0], &[0.7]),
            Err(SystemError::NoSamplesForInput)
        ));
    }

    #[test]
    fn equidistant_samples_weigh_equally() {
        let s = [sample(0.0, 0.0, -1.0), sample(2.0, 0.0, 1.0)];
        let h1 = Bandwidth::uniform(0.3, 1);
        let h2 = Bandwidth::uniform(0.5, 1);
        let a = ckde_density(&s, &h1, &h2, &[-1.0], &[1.0], &[0.0]).unwrap();
        let b = ckde_density(&s, &h1, &h2, &[1.0], &[1.0], &[0.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn density_integrates_to_one() {
        let s: Vec<_> = (0..20)
            .map(|i| sample(i as f64 * 0.1, 0.0, (i as f64).sin()))
            .collect();
        let h1 = Bandwidth::uniform(0.2, 1);
        let h2 = Bandwidth::uniform(0.3, 1);
        let dx = 0.001;
        let total: f64 = (0..8000)
            .map(|k| -4.0 + k as f64 * dx)
            .map(|xp| ckde_density(&s, &h1, &h2, &[xp], &[0.9], &[0.0]).unwrap() * dx)
            .sum();
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn far_queries_stay_finite() {
        let s = [sample(0.0, 0.0, 0.0), sample(1.0, 0.0, 1.0)];
        let h = Bandwidth::uniform(0.01, 1);
        let v = ckde_density(&s, &h, &h, &[1.0], &[500.0], &[0.0]).unwrap();
        assert!(v.is_finite());
    }
}
