//! The Pekar variational problem
//!
//! `g₀ = sup_{‖ψ‖₂=1} ∬ ψ²(x)ψ²(y)/|x−y| dx dy − ½‖∇ψ‖²`
//!
//! restricted to radial ψ centred at the origin, together with the fields the
//! Pekar diffusion needs.

mod eigen;
mod energy;
mod fields;
mod hartree;
pub mod io;
mod scf;
mod wave;

pub use eigen::ground_state_radial;
pub use energy::{energy, Energies};
pub use fields::{drift_field, laplace_log_psi, PsiField};
pub use hartree::{hartree_potential, hartree_potential_checked};
pub use scf::{scf_step, solve_pekar, solve_pekar_with, InitialGuess, PekarSolution, ScfStep, SolverConfig};
pub use wave::{gaussian, normalize, WaveFunction};

/// Value of the Pekar functional at the optimal Gaussian trial state, `2/(3π)`.
pub const GAUSSIAN_TRIAL_BOUND: f64 = 2.0 / (3.0 * std::f64::consts::PI);

/// Exponent of the optimal Gaussian trial state, `ψ² ∝ e^{−λ r²}`, `λ = 8/(9π)`.
pub const GAUSSIAN_TRIAL_EXPONENT: f64 = 8.0 / (9.0 * std::f64::consts::PI);
