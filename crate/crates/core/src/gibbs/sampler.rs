use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Interaction, PathLattice};
use crate::rng::{stream, StreamRng};
use crate::{sub3, Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// pCN step `β` in `(0, 1]`; `β = 1` is an independence sampler.
    pub pcn_beta: f64,
    /// Target displacement scale of single-site moves; at or above the
    /// conditional bridge width the move resamples the site exactly.
    pub local_width: f64,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub n_chains: usize,
    /// Time lags of the recorded centred increments.
    pub lags: Vec<f64>,
    /// Path nodes kept per recorded sample for occupation statistics
    /// (0 disables).
    pub occupation_points: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            pcn_beta: 0.2,
            local_width: 10.0,
            n_sweeps: 4000,
            burn_in: 1000,
            thinning: 2,
            seed: 0,
            n_chains: 4,
            lags: vec![0.5, 1.0, 2.0, 3.0, 5.0],
            occupation_points: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pcn_beta > 0.0 && self.pcn_beta <= 1.0) {
            return Err(Error::invalid(format!("pcn_beta must lie in (0, 1], got {}", self.pcn_beta)));
        }
        if !(self.local_width > 0.0) {
            return Err(Error::invalid("local_width must be positive"));
        }
        if self.burn_in >= self.n_sweeps {
            return Err(Error::invalid(format!(
                "burn_in ({}) must be smaller than n_sweeps ({})",
                self.burn_in, self.n_sweeps
            )));
        }
        if self.thinning == 0 || self.n_chains == 0 {
            return Err(Error::invalid("thinning and n_chains must be at least 1"));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.n_sweeps - self.burn_in) / self.thinning
    }
}

/// Lattice path pinned at `x_{N/2} = 0` with its cached interaction energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub x: Vec<Vec3>,
    pub h: f64,
}

impl PathState {
    pub fn new(x: Vec<Vec3>, lat: &PathLattice, inter: &Interaction) -> Result<Self> {
        if x.len() != lat.n_nodes() {
            return Err(Error::invalid("path length does not match the lattice"));
        }
        if x[lat.pin_index()] != [0.0; 3] {
            return Err(Error::invalid("pinned node must sit at the origin"));
        }
        let h = inter.energy(&x)?;
        Ok(Self { x, h })
    }

    /// Draw from the Brownian prior.
    pub fn from_prior(lat: &PathLattice, inter: &Interaction, rng: &mut StreamRng) -> Result<Self> {
        Self::new(brownian_path(lat, rng), lat, inter)
    }
}

/// Brownian path on the lattice with unit diffusivity, pinned at `t = 0`.
pub(crate) fn brownian_path(lat: &PathLattice, rng: &mut StreamRng) -> Vec<Vec3> {
    let n = lat.n_nodes();
    let pin = lat.pin_index();
    let s = lat.dt().sqrt();
    let mut x = vec![[0.0; 3]; n];
    for i in pin + 1..n {
        for a in 0..3 {
            x[i][a] = x[i - 1][a] + s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    for i in (0..pin).rev() {
        for a in 0..3 {
            x[i][a] = x[i + 1][a] + s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    x
}

#[inline]
fn accept(log_ratio: f64, rng: &mut StreamRng) -> bool {
    log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp()
}

/// One preconditioned Crank–Nicolson proposal `ω′ = √(1−β²) ω + β ξ` with
/// `ξ` a fresh pinned Brownian path, accepted with `min(1, e^{κ(H′−H)})`.
pub fn pcn_sweep(
    state: &mut PathState,
    lat: &PathLattice,
    inter: &Interaction,
    beta: f64,
    rng: &mut StreamRng,
) -> Result<bool> {
    let xi = brownian_path(lat, rng);
    let rho = (1.0 - beta * beta).sqrt();
    let proposal: Vec<Vec3> = state
        .x
        .iter()
        .zip(&xi)
        .map(|(x, z)| [rho * x[0] + beta * z[0], rho * x[1] + beta * z[1], rho * x[2] + beta * z[2]])
        .collect();
    let h_new = inter.energy(&proposal)?;
    if accept(lat.kappa * (h_new - state.h), rng) {
        state.x = proposal;
        state.h = h_new;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Single-site moves over all free nodes. Each proposal is a Crank–Nicolson
/// step inside the Gaussian conditional law of the site given its
/// neighbours, so the Brownian prior is preserved exactly; the Metropolis
/// factor is `e^{κ ΔH}`. Returns the number of accepted moves.
pub fn local_sweep(
    state: &mut PathState,
    lat: &PathLattice,
    inter: &Interaction,
    local_width: f64,
    rng: &mut StreamRng,
) -> Result<usize> {
    let n = lat.n_steps;
    let pin = lat.pin_index();
    let dt = lat.dt();
    let mut accepted = 0;
    for i in 0..=n {
        if i == pin {
            continue;
        }
        let (m, s) = if i == 0 {
            (state.x[1], dt.sqrt())
        } else if i == n {
            (state.x[n - 1], dt.sqrt())
        } else {
            let (a, b) = (state.x[i - 1], state.x[i + 1]);
            ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])], (0.5 * dt).sqrt())
        };
        let gamma = (local_width / s).min(1.0);
        let rho = (1.0 - gamma * gamma).sqrt();
        let xi = state.x[i];
        let mut y = [0.0; 3];
        for a in 0..3 {
            y[a] = m[a] + rho * (xi[a] - m[a]) + gamma * s * rng.sample::<f64, _>(StandardNormal);
        }
        let dh = inter.delta(&state.x, i, &y)?;
        if accept(lat.kappa * dh, rng) {
            state.x[i] = y;
            state.h += dh;
            accepted += 1;
        }
    }
    Ok(accepted)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub pcn: f64,
    pub local: f64,
}

/// Increments `ω(ℓ/2) − ω(−ℓ/2)` (rounded down to the lattice) at one lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSamples {
    pub lag: f64,
    pub vectors: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub lattice: PathLattice,
    pub config: SamplerConfig,
    pub chain_id: u64,
    /// `H` after every sweep, burn-in included.
    pub energy: Vec<f64>,
    /// Fraction of accepted moves (pCN and single-site) in every sweep.
    pub acceptance_trace: Vec<f64>,
    pub acceptance: Acceptance,
    /// `ω(T) − ω(−T)` per recorded sample.
    pub endpoint: Vec<Vec3>,
    pub increments: Vec<LagSamples>,
    /// Subsampled path nodes per recorded sample.
    pub occupation: Vec<Vec<Vec3>>,
}

impl ChainOutput {
    /// Mean of `H` after burn-in.
    pub fn mean_energy(&self) -> f64 {
        crate::stats::mean(&self.energy[self.config.burn_in..])
    }

    pub fn n_samples(&self) -> usize {
        self.endpoint.len()
    }
}

/// One chain on stream `chain_id` of `cfg.seed`.
pub fn run_chain(lat: &PathLattice, cfg: &SamplerConfig, chain_id: u64) -> Result<ChainOutput> {
    lat.validate()?;
    cfg.validate()?;
    let inter = Interaction::new(lat)?;
    let windows: Vec<(f64, usize)> =
        cfg.lags.iter().map(|&lag| lat.lag_steps(lag).map(|m| (lag, m))).collect::<Result<_>>()?;
    let pin = lat.pin_index();
    let n = lat.n_steps;
    let occ_stride = if cfg.occupation_points == 0 { 0 } else { lat.n_nodes().div_ceil(cfg.occupation_points) };

    let mut rng = stream(cfg.seed, chain_id);
    let mut state = PathState::from_prior(lat, &inter, &mut rng)?;
    let n_samples = cfg.n_samples();
    let mut out = ChainOutput {
        lattice: *lat,
        config: cfg.clone(),
        chain_id,
        energy: Vec::with_capacity(cfg.n_sweeps),
        acceptance_trace: Vec::with_capacity(cfg.n_sweeps),
        acceptance: Acceptance { pcn: 0.0, local: 0.0 },
        endpoint: Vec::with_capacity(n_samples),
        increments: windows.iter().map(|&(lag, _)| LagSamples { lag, vectors: Vec::with_capacity(n_samples) }).collect(),
        occupation: Vec::new(),
    };
    let (mut pcn_acc, mut local_acc) = (0usize, 0usize);
    for sweep in 0..cfg.n_sweeps {
        let a = pcn_sweep(&mut state, lat, &inter, cfg.pcn_beta, &mut rng)? as usize;
        let b = local_sweep(&mut state, lat, &inter, cfg.local_width, &mut rng)?;
        debug_assert!({
            let full = inter.energy(&state.x)?;
            (full - state.h).abs() <= 1e-8 * (1.0 + full.abs())
        });
        pcn_acc += a;
        local_acc += b;
        out.energy.push(state.h);
        out.acceptance_trace.push((a + b) as f64 / (1 + n) as f64);
        if sweep >= cfg.burn_in && (sweep + 1 - cfg.burn_in) % cfg.thinning == 0 {
            let x = &state.x;
            out.endpoint.push(sub3(&x[n], &x[0]));
            for (rec, &(_, m)) in out.increments.iter_mut().zip(&windows) {
                let lo = pin - m / 2;
                rec.vectors.push(sub3(&x[lo + m], &x[lo]));
            }
            if occ_stride > 0 {
                out.occupation.push(x.iter().step_by(occ_stride).cloned().collect());
            }
        }
    }
    out.acceptance = Acceptance {
        pcn: pcn_acc as f64 / cfg.n_sweeps as f64,
        local: local_acc as f64 / (cfg.n_sweeps * n) as f64,
    };
    Ok(out)
}

/// `cfg.n_chains` independent chains, run in parallel.
pub fn sample_polaron(lat: &PathLattice, cfg: &SamplerConfig) -> Result<Vec<ChainOutput>> {
    lat.validate()?;
    cfg.validate()?;
    (0..cfg.n_chains as u64).into_par_iter().map(|c| run_chain(lat, cfg, c)).collect()
}
