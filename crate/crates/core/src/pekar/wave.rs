use std::sync::Arc;

use crate::radial::{Parity, RadialFunction, RadialGrid, Tail};
use crate::{Error, Result};

/// A nonnegative radial profile with `∫ 4π r² ψ² dr = 1`.
#[derive(Debug, Clone)]
pub struct WaveFunction(RadialFunction);

impl WaveFunction {
    pub fn as_radial(&self) -> &RadialFunction {
        &self.0
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.0.eval(r)
    }

    pub fn norm_squared(&self) -> f64 {
        let v = self.values();
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        self.grid().shell_integral(&sq)
    }

    pub fn tail(&self) -> Tail {
        self.0.tail()
    }

    /// Reassembles a wave function from stored node values without
    /// renormalizing (used when importing files).
    pub(crate) fn from_normalized_values(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::Parse("wave function has negative node values".into()));
        }
        let tail = fit_exponential_tail(&grid, &values);
        Ok(Self(RadialFunction::new(grid, values, Parity::Even, tail)))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("value {v} at node {i}")));
    }
    Ok(())
}

/// `|f| / ‖f‖₂` under the shell measure `4π r² dr`.
pub fn normalize(f: &RadialFunction) -> Result<WaveFunction> {
    normalize_values(f.grid().clone(), f.values())
}

pub(crate) fn normalize_values(grid: Arc<RadialGrid>, values: &[f64]) -> Result<WaveFunction> {
    check_finite(values)?;
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let sq: Vec<f64> = abs.iter().map(|v| v * v).collect();
    let norm2 = grid.shell_integral(&sq);
    if !(norm2 > 0.0) {
        return Err(Error::AllZero);
    }
    let scale = 1.0 / norm2.sqrt();
    let psi: Vec<f64> = abs.iter().map(|v| v * scale).collect();
    let tail = fit_exponential_tail(&grid, &psi);
    Ok(WaveFunction(RadialFunction::new(grid, psi, Parity::Even, tail)))
}

/// Normalized Gaussian with `ψ² = (λ/π)^{3/2} e^{−λ r²}`, sampled on `grid`.
pub fn gaussian(grid: Arc<RadialGrid>, lambda: f64) -> Result<WaveFunction> {
    let values: Vec<f64> = grid.nodes().iter().map(|r| (-0.5 * lambda * r * r).exp()).collect();
    normalize_values(grid, &values)
}

/// Least-squares fit of `log(r ψ) = log A − κ r` on `[0.5, 0.8]·r_max`.
///
/// The upper end stays clear of the Dirichlet wall just beyond `r_max`,
/// which bends the profile down in the last few decay lengths.
pub(crate) fn fit_exponential_tail(grid: &RadialGrid, psi: &[f64]) -> Tail {
    let r_max = grid.r_max();
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&r, &p) in grid.nodes().iter().zip(psi) {
        if r < 0.5 * r_max || r > 0.8 * r_max {
            continue;
        }
        if !(p > 0.0 && p.is_finite()) {
            return Tail::Zero;
        }
        let y = (r * p).ln();
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
        n += 1.0;
    }
    if n < 3.0 {
        return Tail::Zero;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    if !(slope < 0.0) || !intercept.is_finite() {
        return Tail::Zero;
    }
    Tail::Exponential { amplitude: intercept.exp(), decay: -slope }
}
