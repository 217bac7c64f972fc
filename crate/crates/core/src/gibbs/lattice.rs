use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `ε e^{−ε|t−s|} V_η` over the pairs of `[−T, T]²`.
    Polaron,
    /// `V_η / (2T)` over the pairs of `[−T, T]²`.
    MeanField,
}

/// Time lattice `t_i = −T + i Δt`, `Δt = 2T/N`, together with the
/// interaction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLattice {
    /// Half-horizon `T`.
    pub horizon: f64,
    /// Number of time steps `N` (even).
    pub n_steps: usize,
    pub eps: f64,
    pub eta: f64,
    pub kernel: Kernel,
    pub kappa: f64,
}

impl PathLattice {
    pub fn polaron(eps: f64, horizon: f64, n_steps: usize, eta: f64, kappa: f64) -> Self {
        Self { horizon, n_steps, eps, eta, kernel: Kernel::Polaron, kappa }
    }

    pub fn mean_field(horizon: f64, n_steps: usize, eta: f64, kappa: f64) -> Self {
        Self { horizon, n_steps, eps: 1.0, eta, kernel: Kernel::MeanField, kappa }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon T must be positive, got {}", self.horizon)));
        }
        if self.n_steps < 2 || self.n_steps % 2 != 0 {
            return Err(Error::invalid(format!("n_steps must be even and at least 2, got {}", self.n_steps)));
        }
        if self.kernel == Kernel::Polaron && !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::invalid(format!("kappa must lie in [0, 1], got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.horizon / self.n_steps as f64
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn time(&self, i: usize) -> f64 {
        -self.horizon + i as f64 * self.dt()
    }

    /// Trapezoid weights.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_steps {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }

    /// Index of the node at `t = 0`.
    pub fn pin_index(&self) -> usize {
        self.n_steps / 2
    }

    /// Number of lattice steps spanned by a time lag, if it is a multiple of `Δt`.
    pub fn lag_steps(&self, lag: f64) -> Result<usize> {
        let m = lag / self.dt();
        let k = m.round();
        if !(lag >= 0.0) || (m - k).abs() > 1e-9 * m.max(1.0) {
            return Err(Error::invalid(format!("lag {lag} is not a multiple of dt = {}", self.dt())));
        }
        if k as usize > self.n_steps {
            return Err(Error::LagTooLong { lag, span: 2.0 * self.horizon });
        }
        Ok(k as usize)
    }

    /// Pair coefficient `c_ij` with `H = Σ_{i<j} c_ij V_η(x_i − x_j)`.
    pub fn pair_coefficient(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let w = self.weight(i) * self.weight(j);
        match self.kernel {
            Kernel::Polaron => {
                let tau = (i as f64 - j as f64).abs() * self.dt();
                self.eps * w * (-self.eps * tau).exp()
            }
            Kernel::MeanField => w / self.horizon,
        }
    }
}
