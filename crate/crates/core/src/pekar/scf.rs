use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::wave::normalize_values;
use super::{energy, gaussian, ground_state_radial, hartree_potential_checked, Energies, WaveFunction};
use crate::radial::{Parity, RadialFunction, RadialGrid, Tail};
use crate::{Error, Result};

/// Iteration controls for [`solve_pekar_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Stop once `sup |T(ψ) − ψ|` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new eigenvector in the mix, in `(0, 1]`.
    pub damping: f64,
    /// Floor for automatic halving of `damping`.
    pub min_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, damping: 0.7, min_damping: 1.0 / 64.0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.min_damping > 0.0 && self.min_damping <= self.damping) {
            return Err(Error::invalid("min_damping must lie in (0, damping]"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGuess {
    /// `ψ² ∝ e^{−λ r²}`.
    Gaussian { lambda: f64 },
    /// `ψ ∝ e^{−a r}`.
    Hydrogenic { decay: f64 },
    /// Node values on the solver grid (normalized before use).
    Custom { values: Vec<f64> },
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Gaussian { lambda: super::GAUSSIAN_TRIAL_EXPONENT }
    }
}

impl InitialGuess {
    pub fn build(&self, grid: &Arc<RadialGrid>) -> Result<WaveFunction> {
        match self {
            InitialGuess::Gaussian { lambda } => {
                if !(*lambda > 0.0) {
                    return Err(Error::invalid("Gaussian exponent must be positive"));
                }
                gaussian(grid.clone(), *lambda)
            }
            InitialGuess::Hydrogenic { decay } => {
                if !(*decay > 0.0) {
                    return Err(Error::invalid("decay must be positive"));
                }
                let v: Vec<f64> = grid.nodes().iter().map(|r| (-decay * r).exp()).collect();
                normalize_values(grid.clone(), &v)
            }
            InitialGuess::Custom { values } => {
                if values.len() != grid.len() {
                    return Err(Error::invalid(format!(
                        "custom initial guess has {} values for {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                normalize_values(grid.clone(), values)
            }
        }
    }
}

/// One application of the self-consistent map.
#[derive(Debug, Clone)]
pub struct ScfStep {
    /// `damping · T(ψ) + (1 − damping) · ψ`, renormalized.
    pub psi: WaveFunction,
    /// Undamped image `T(ψ)`: ground state of `−½Δ − 2Φ_ψ`.
    pub eigen: WaveFunction,
    /// Lagrange multiplier `μ = −e` of the eigenproblem.
    pub mu: f64,
    /// `sup |T(ψ) − ψ|` over the nodes.
    pub residual: f64,
}

pub fn scf_step(psi: &WaveFunction, damping: f64) -> Result<ScfStep> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::invalid(format!("damping must lie in (0, 1], got {damping}")));
    }
    let grid = psi.grid();
    let phi = hartree_potential_checked(psi)?;
    let w: Vec<f64> = phi.values().iter().map(|p| -2.0 * p).collect();
    let w = RadialFunction::new(grid.clone(), w, Parity::Even, Tail::Zero);
    let (e, u) = ground_state_radial(&w, grid)?;
    let new: Vec<f64> = u.values().iter().zip(grid.nodes()).map(|(u, r)| u / r).collect();
    let eigen = normalize_values(grid.clone(), &new)?;
    let residual = eigen.values().iter().zip(psi.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mixed: Vec<f64> = eigen
        .values()
        .iter()
        .zip(psi.values())
        .map(|(a, b)| damping * a + (1.0 - damping) * b)
        .collect();
    let psi = normalize_values(grid.clone(), &mixed)?;
    Ok(ScfStep { psi, eigen, mu: -e, residual })
}

/// Converged Pekar maximizer with its energy split.
#[derive(Debug, Clone)]
pub struct PekarSolution {
    pub psi: WaveFunction,
    pub coulomb: f64,
    pub kinetic: f64,
    pub g: f64,
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl PekarSolution {
    pub fn energies(&self) -> Energies {
        Energies { coulomb: self.coulomb, kinetic: self.kinetic, g: self.g }
    }

    pub fn virial_defect(&self) -> f64 {
        self.energies().virial_defect()
    }
}

/// [`solve_pekar_with`] using default damping.
pub fn solve_pekar(grid: &Arc<RadialGrid>, tol: f64, max_iter: usize, init: &InitialGuess) -> Result<PekarSolution> {
    let cfg = SolverConfig { tol, max_iter, ..SolverConfig::default() };
    solve_pekar_with(grid, &cfg, init)
}

/// Damped fixed-point iteration `ψ ↦ ground state of −½Δ − 2Φ_ψ`.
///
/// A step that lowers `g` is rejected and retried with half the damping,
/// down to `min_damping`. Decreases below `10⁻³ · residual` do not count:
/// on graded grids the discrete fixed point is not exactly the maximizer of
/// the discrete energy and `g` settles from above by that order.
pub fn solve_pekar_with(grid: &Arc<RadialGrid>, cfg: &SolverConfig, init: &InitialGuess) -> Result<PekarSolution> {
    cfg.validate()?;
    let mut psi = init.build(grid)?;
    let mut g = energy(&psi)?.g;
    let mut damping = cfg.damping;
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let step = scf_step(&psi, damping)?;
        residual = step.residual;
        if residual < cfg.tol {
            let e = energy(&step.eigen)?;
            return Ok(PekarSolution {
                psi: step.eigen,
                coulomb: e.coulomb,
                kinetic: e.kinetic,
                g: e.g,
                mu: step.mu,
                residual,
                iterations: it,
            });
        }
        let g_new = energy(&step.psi)?.g;
        if g_new < g - 1e-3 * residual - 1e-14 && damping > cfg.min_damping {
            damping = (0.5 * damping).max(cfg.min_damping);
            continue;
        }
        psi = step.psi;
        g = g_new;
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pekar::GAUSSIAN_TRIAL_BOUND;
    use std::sync::OnceLock;

    fn default_grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(20.0, 2000).unwrap())
    }

    fn reference() -> &'static PekarSolution {
        static SOL: OnceLock<PekarSolution> = OnceLock::new();
        SOL.get_or_init(|| solve_pekar(&default_grid(), 1e-10, 500, &InitialGuess::default()).unwrap())
    }

    #[test]
    fn converges_above_gaussian_bound() {
        let s = reference();
        assert!(s.g > GAUSSIAN_TRIAL_BOUND + 1e-3, "g = {}", s.g);
        assert!(s.g < 0.25);
        assert!(s.virial_defect() < 1e-4, "virial {}", s.virial_defect());
        assert_eq!(s.g, s.coulomb - s.kinetic);
        assert!((s.psi.norm_squared() - 1.0).abs() < 1e-8);
        // μ = 2C − K from the Euler–Lagrange equation
        assert!((s.mu - (2.0 * s.coulomb - s.kinetic)).abs() < 1e-5);
    }

    #[test]
    fn solution_is_radially_decreasing_and_positive() {
        let v = reference().psi.values();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let s = reference();
        let step = scf_step(&s.psi, 1.0).unwrap();
        assert!(step.residual < 1e-9, "residual {}", step.residual);
    }

    #[test]
    fn first_step_from_optimal_gaussian_raises_g() {
        let grid = default_grid();
        let psi = InitialGuess::default().build(&grid).unwrap();
        let g0 = energy(&psi).unwrap().g;
        let step = scf_step(&psi, 0.7).unwrap();
        let g1 = energy(&step.psi).unwrap().g;
        assert!(g1 > g0, "{g1} <= {g0}");
        // golden value from this implementation
        assert!((g1 - FIRST_STEP_G).abs() < 1e-7, "g1 = {g1:.10}");
    }

    const FIRST_STEP_G: f64 = 0.2163435851;

    #[test]
    fn hydrogenic_and_gaussian_starts_agree() {
        let s = solve_pekar(&default_grid(), 1e-10, 500, &InitialGuess::Hydrogenic { decay: 1.0 }).unwrap();
        assert!((s.g - reference().g).abs() < 1e-6);
    }

    #[test]
    fn damping_does_not_change_the_limit() {
        let grid = default_grid();
        let full = SolverConfig { damping: 1.0, min_damping: 1.0 / 64.0, ..SolverConfig::default() };
        let half = SolverConfig { damping: 0.5, ..full };
        let a = solve_pekar_with(&grid, &full, &InitialGuess::default()).unwrap();
        let b = solve_pekar_with(&grid, &half, &InitialGuess::default()).unwrap();
        let sup = a.psi.values().iter().zip(b.psi.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-6, "sup {sup}");
    }

    #[test]
    fn iteration_cap_reports_residual() {
        match solve_pekar(&default_grid(), 1e-10, 1, &InitialGuess::default()) {
            Err(Error::NoConvergence { iterations: 1, residual }) => assert!(residual > 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { damping: 1.5, ..Default::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
        let bad = InitialGuess::Custom { values: vec![1.0; 3] };
        assert!(bad.build(&default_grid()).is_err());
    }
}
