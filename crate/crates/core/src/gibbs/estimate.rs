use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::brownian_path;
use super::{sample_polaron, ChainOutput, Interaction, PathLattice, SamplerConfig};
use crate::rng::{derive_seed, stream};
use crate::stats::{self, Estimate};
use crate::{Error, Result};

/// Quadrature rule over the coupling `κ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KappaQuadrature {
    pub fn gauss_legendre(n: usize) -> Self {
        let (nodes, weights) = stats::gauss_legendre(n, 0.0, 1.0);
        Self { nodes, weights }
    }

    /// Trapezoid rule through sorted nodes spanning `[0, 1]`.
    pub fn trapezoid(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("trapezoid κ nodes must increase from 0 to 1"));
        }
        let mut weights = vec![0.0; nodes.len()];
        for k in 0..nodes.len() - 1 {
            let h = nodes[k + 1] - nodes[k];
            weights[k] += 0.5 * h;
            weights[k + 1] += 0.5 * h;
        }
        Ok(Self { nodes, weights })
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.nodes.len() != self.weights.len() {
            return Err(Error::invalid("κ quadrature needs matching, nonempty nodes and weights"));
        }
        if self.nodes.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return Err(Error::invalid("κ nodes must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Thermodynamic-integration estimate of `g = (1/2T) log Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GEstimate {
    pub lattice: PathLattice,
    pub quadrature: KappaQuadrature,
    /// `E_κ[H] / (2T)` at every node (between-chain standard errors).
    pub integrand: Vec<Estimate>,
    /// Quadrature of the integrand for every chain index.
    pub per_chain: Vec<f64>,
    pub g: Estimate,
}

/// `g = (1/2T) ∫₀¹ E_κ[H] dκ` since `d/dκ log Z_κ = E_κ[H]`.
///
/// Chain `c` at every node contributes to the `c`-th replicate of the
/// integral; the standard error is the spread of these replicates.
pub fn thermo_integrate(lat: &PathLattice, quad: &KappaQuadrature, cfg: &SamplerConfig) -> Result<GEstimate> {
    lat.validate()?;
    cfg.validate()?;
    quad.validate()?;
    if cfg.n_chains < 2 {
        return Err(Error::InsufficientSamples("thermodynamic integration needs at least 2 chains".into()));
    }
    let norm = 1.0 / (2.0 * lat.horizon);
    let mut per_node = Vec::with_capacity(quad.nodes.len());
    for (k, &kappa) in quad.nodes.iter().enumerate() {
        let cfg_k = SamplerConfig { seed: derive_seed(cfg.seed, k as u64 + 1), lags: Vec::new(), occupation_points: 0, ..cfg.clone() };
        let chains = sample_polaron(&lat.with_kappa(kappa), &cfg_k)?;
        per_node.push(chains.iter().map(|c| norm * c.mean_energy()).collect::<Vec<f64>>());
    }
    let integrand = per_node.iter().map(|v| stats::mean_stderr(v)).collect();
    let per_chain: Vec<f64> = (0..cfg.n_chains)
        .map(|c| quad.weights.iter().zip(&per_node).map(|(w, v)| w * v[c]).sum())
        .collect();
    let g = stats::mean_stderr(&per_chain);
    Ok(GEstimate { lattice: *lat, quadrature: quad.clone(), integrand, per_chain, g })
}

/// Plain Monte Carlo of `E_prior[H] / (2T)` over independent Brownian paths.
pub fn prior_energy_mc(lat: &PathLattice, n_paths: usize, seed: u64) -> Result<Estimate> {
    let inter = Interaction::new(lat)?;
    let norm = 1.0 / (2.0 * lat.horizon);
    let values: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(seed, p);
            inter.energy(&brownian_path(lat, &mut rng)).map(|h| norm * h)
        })
        .collect::<Result<_>>()?;
    Ok(stats::mean_stderr(&values))
}

/// `σ̂² = Var[(ω(T) − ω(−T))_a] / (2T)` averaged over axes `a` (or a single
/// axis), one replicate per chain; the error bar is the between-chain spread.
pub fn clt_variance(outputs: &[ChainOutput], axis: Option<usize>) -> Result<Estimate> {
    if outputs.len() < 2 {
        return Err(Error::InsufficientSamples(format!("need at least 2 chains, got {}", outputs.len())));
    }
    let axes: Vec<usize> = match axis {
        Some(a) if a < 3 => vec![a],
        Some(a) => return Err(Error::invalid(format!("axis {a} out of range"))),
        None => vec![0, 1, 2],
    };
    let per_chain: Vec<f64> = outputs
        .iter()
        .map(|c| {
            if c.endpoint.len() < 2 {
                return Err(Error::InsufficientSamples(format!("chain {} has {} samples", c.chain_id, c.endpoint.len())));
            }
            let two_t = 2.0 * c.lattice.horizon;
            let v: f64 = axes
                .iter()
                .map(|&a| stats::variance(&c.endpoint.iter().map(|e| e[a]).collect::<Vec<_>>()))
                .sum::<f64>()
                / axes.len() as f64;
            Ok(v / two_t)
        })
        .collect::<Result<_>>()?;
    Ok(stats::mean_stderr(&per_chain))
}
