use std::f64::consts::PI;
use std::sync::Arc;

use super::WaveFunction;
use crate::radial::{derivatives, Parity, RadialFunction, RadialGrid, Tail};
use crate::{Error, Result};

fn log_values(psi: &WaveFunction) -> Result<Vec<f64>> {
    psi.grid()
        .nodes()
        .iter()
        .zip(psi.values())
        .map(|(&r, &p)| if p > 0.0 && p.is_finite() { Ok(p.ln()) } else { Err(Error::NonPositivePsi { r, value: p }) })
        .collect()
}

fn tail_decay(psi: &WaveFunction) -> Option<(f64, f64)> {
    match psi.tail() {
        Tail::Exponential { amplitude, decay } => Some((amplitude, decay)),
        _ => None,
    }
}

/// Radial drift `b(r) = (log ψ)′(r)`; the Cartesian drift is `b(|x|) x/|x|`.
pub fn drift_field(psi: &WaveFunction) -> Result<RadialFunction> {
    let logp = log_values(psi)?;
    let grid = psi.grid();
    let (d1, _) = derivatives(grid, &logp, Parity::Even);
    let tail = tail_decay(psi).map_or(Tail::Hold, |(_, decay)| Tail::LogDerivative { decay });
    Ok(RadialFunction::new(grid.clone(), d1, Parity::Odd, tail))
}

/// `Δ log ψ = (log ψ)″ + (2/r)(log ψ)′`.
pub fn laplace_log_psi(psi: &WaveFunction) -> Result<RadialFunction> {
    let logp = log_values(psi)?;
    let grid = psi.grid();
    let (d1, d2) = derivatives(grid, &logp, Parity::Even);
    let lap = grid.nodes().iter().zip(d1.iter().zip(&d2)).map(|(r, (a, b))| b + 2.0 * a / r).collect();
    let tail = tail_decay(psi).map_or(Tail::Hold, |(_, decay)| Tail::LaplaceLog { decay });
    Ok(RadialFunction::new(grid.clone(), lap, Parity::Even, tail))
}

/// Interpolated `log ψ`, drift and `Δ log ψ` plus the radial CDF of `ψ²`,
/// everything the Pekar diffusion and the Girsanov density evaluate.
///
/// Beyond `trust_radius` the fitted exponential tail replaces the grid values
/// (the Dirichlet wall bends eigen-solver profiles down near `r_max`).
#[derive(Debug, Clone)]
pub struct PsiField {
    psi: WaveFunction,
    log_psi: RadialFunction,
    drift: RadialFunction,
    laplace: RadialFunction,
    trust_radius: f64,
    tail: Option<(f64, f64)>,
    /// `(r, P(|X| ≤ r))` with the origin prepended.
    cdf_r: Vec<f64>,
    cdf: Vec<f64>,
}

impl PsiField {
    /// Uses the whole grid (`trust_radius = r_max`).
    pub fn new(psi: &WaveFunction) -> Result<Self> {
        Self::with_trust_radius(psi, psi.grid().r_max())
    }

    /// Eigen-solver output: trust the grid up to `0.8 r_max` when an
    /// exponential tail was fitted.
    pub fn for_solution(psi: &WaveFunction) -> Result<Self> {
        let r = if tail_decay(psi).is_some() { 0.8 * psi.grid().r_max() } else { psi.grid().r_max() };
        Self::with_trust_radius(psi, r)
    }

    pub fn with_trust_radius(psi: &WaveFunction, trust_radius: f64) -> Result<Self> {
        let grid: &Arc<RadialGrid> = psi.grid();
        let logp = log_values(psi)?;
        let tail = tail_decay(psi);
        let log_tail = tail.map_or(Tail::Hold, |(a, k)| Tail::LogExponential { log_amplitude: a.ln(), decay: k });
        let log_psi = RadialFunction::new(grid.clone(), logp, Parity::Even, log_tail);
        let drift = drift_field(psi)?;
        let laplace = laplace_log_psi(psi)?;
        let dens: Vec<f64> = grid.nodes().iter().zip(psi.values()).map(|(r, p)| 4.0 * PI * r * r * p * p).collect();
        let mut cdf = vec![0.0];
        cdf.extend(grid.cumulative(&dens));
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|c| *c /= total);
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let mut cdf_r = vec![0.0];
        cdf_r.extend_from_slice(grid.nodes());
        Ok(Self { psi: psi.clone(), log_psi, drift, laplace, trust_radius, tail, cdf_r, cdf })
    }

    pub fn psi(&self) -> &WaveFunction {
        &self.psi
    }

    fn use_tail(&self, r: f64) -> bool {
        self.tail.is_some() && r > self.trust_radius
    }

    pub fn log_psi(&self, r: f64) -> f64 {
        match self.tail {
            Some((a, k)) if self.use_tail(r) => a.ln() - k * r - r.ln(),
            _ => self.log_psi.eval(r),
        }
    }

    /// Radial drift `b(r)`.
    pub fn drift(&self, r: f64) -> f64 {
        match self.tail {
            Some((_, k)) if self.use_tail(r) => -k - 1.0 / r,
            _ => self.drift.eval(r),
        }
    }

    pub fn laplace_log(&self, r: f64) -> f64 {
        match self.tail {
            Some((_, k)) if self.use_tail(r) => -2.0 * k / r - 1.0 / (r * r),
            _ => self.laplace.eval(r),
        }
    }

    /// Inverse of the radial CDF of `4π r² ψ²` (linear between nodes).
    pub fn radius_quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c < u);
        if k == 0 {
            return 0.0;
        }
        if k >= self.cdf.len() {
            return *self.cdf_r.last().unwrap();
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (r0, r1) = (self.cdf_r[k - 1], self.cdf_r[k]);
        if c1 > c0 {
            r0 + (u - c0) / (c1 - c0) * (r1 - r0)
        } else {
            r1
        }
    }

    /// `P(|X| ≤ r)` under `ψ²`.
    pub fn radius_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let k = self.cdf_r.partition_point(|&x| x < r);
        if k >= self.cdf_r.len() {
            return 1.0;
        }
        let (r0, r1) = (self.cdf_r[k - 1], self.cdf_r[k]);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        c0 + (r - r0) / (r1 - r0) * (c1 - c0)
    }
}
