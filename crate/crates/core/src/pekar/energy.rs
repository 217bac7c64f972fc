use serde::{Deserialize, Serialize};

use super::{hartree_potential, WaveFunction};
use crate::radial::{derivatives, Parity};
use crate::{Error, Result};

/// Energy split of the Pekar functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    /// Coulomb self-energy `C = ∬ ψ²ψ² / |x−y|`.
    pub coulomb: f64,
    /// Kinetic term `K = ½ ‖∇ψ‖²`.
    pub kinetic: f64,
    /// `g = C − K`.
    pub g: f64,
}

impl Energies {
    /// `|C − 2K| / C`; vanishes at any stationary point of the functional.
    pub fn virial_defect(&self) -> f64 {
        (self.coulomb - 2.0 * self.kinetic).abs() / self.coulomb
    }
}

pub fn energy(psi: &WaveFunction) -> Result<Energies> {
    let grid = psi.grid();
    let phi = hartree_potential(psi);
    let dens_phi: Vec<f64> = psi.values().iter().zip(phi.values()).map(|(p, f)| p * p * f).collect();
    let coulomb = grid.shell_integral(&dens_phi);
    let (d1, _) = derivatives(grid, psi.values(), Parity::Even);
    let grad2: Vec<f64> = d1.iter().map(|d| d * d).collect();
    let kinetic = 0.5 * grid.shell_integral(&grad2);
    if !(coulomb.is_finite() && kinetic.is_finite()) {
        return Err(Error::NonFinite(format!("C = {coulomb}, K = {kinetic}")));
    }
    Ok(Energies { coulomb, kinetic, g: coulomb - kinetic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pekar::{gaussian, normalize, GAUSSIAN_TRIAL_BOUND, GAUSSIAN_TRIAL_EXPONENT};
    use crate::radial::{RadialFunction, RadialGrid, Tail};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(20.0, 2000).unwrap())
    }

    #[test]
    fn gaussian_closed_forms() {
        for lambda in [0.2, GAUSSIAN_TRIAL_EXPONENT, 1.0] {
            let e = energy(&gaussian(grid(), lambda).unwrap()).unwrap();
            assert!((e.coulomb - (2.0 * lambda / PI).sqrt()).abs() < 1e-8, "C at {lambda}");
            assert!((e.kinetic - 0.75 * lambda).abs() < 1e-8, "K at {lambda}");
            assert_eq!(e.g, e.coulomb - e.kinetic);
        }
    }

    #[test]
    fn optimal_gaussian_hits_trial_bound() {
        let e = energy(&gaussian(grid(), GAUSSIAN_TRIAL_EXPONENT).unwrap()).unwrap();
        assert!((e.g - GAUSSIAN_TRIAL_BOUND).abs() < 1e-8);
        assert!((GAUSSIAN_TRIAL_BOUND - 0.2122066).abs() < 1e-7);
        // the optimal trial state is itself virial
        assert!(e.virial_defect() < 1e-7);
    }

    #[test]
    fn scaling_law_at_sigma_two() {
        // ψ_σ(r) = σ^{3/2} ψ(σ r) for a non-Gaussian profile
        let base = |r: f64| (-r).exp() * (1.0 + 0.5 * r * r);
        let g = grid();
        let psi1 = normalize(&RadialFunction::from_fn(g.clone(), Parity::Even, Tail::Zero, base)).unwrap();
        let psi2 = normalize(&RadialFunction::from_fn(g, Parity::Even, Tail::Zero, |r| base(2.0 * r))).unwrap();
        let (e1, e2) = (energy(&psi1).unwrap(), energy(&psi2).unwrap());
        assert!((e2.coulomb - 2.0 * e1.coulomb).abs() < 1e-6);
        assert!((e2.kinetic - 4.0 * e1.kinetic).abs() < 1e-5);
    }
}
