//! Metropolis sampling of the Polaron path measure
//!
//! `dℙ̂ ∝ exp(κ H(ω)) dℙ`, with `ℙ` three-dimensional Brownian motion on
//! `[−T, T]` pinned at `ω(0) = 0` and `H` the exponentially damped,
//! regularized Coulomb self-interaction (or its mean-field counterpart).

mod energy;
mod estimate;
mod lattice;
mod sampler;

pub use energy::{delta_energy, interaction_energy, Interaction};
pub use estimate::{clt_variance, prior_energy_mc, thermo_integrate, GEstimate, KappaQuadrature};
pub use lattice::{Kernel, PathLattice};
pub use sampler::{
    local_sweep, pcn_sweep, run_chain, sample_polaron, Acceptance, ChainOutput, LagSamples, PathState,
    SamplerConfig,
};
