//! Numerical laboratory for the strong-coupling Polaron.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial`] – radial grids, quadrature and monotone interpolation.
//! * [`pekar`] – the Pekar variational problem: Hartree potential, energies,
//!   the radial eigen-solver, self-consistent iteration and the fields
//!   (`∇ψ/ψ`, `Δ log ψ`) that drive the Pekar diffusion.
//! * [`gibbs`] – Metropolis sampling of the Polaron path measure on a time
//!   lattice, thermodynamic integration for `g(ε)` and the CLT variance.
//! * [`sde`] – Euler–Maruyama simulation of the stationary Pekar process and
//!   the Girsanov log-density against Brownian motion.
//! * [`diagnostics`] – MSD curves, energy-distance / KS two-sample tests, the
//!   localization functional and the comparison report.
//! * [`io`] – CSV/JSON persistence and run manifests.

pub mod diagnostics;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod pekar;
pub mod radial;
pub mod rng;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};

/// A point or displacement in three dimensions.
pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn norm3(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub(crate) fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
