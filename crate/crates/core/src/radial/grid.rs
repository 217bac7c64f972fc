use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// Geometric progression starting at `r_first`.
    Geometric { r_first: f64 },
}

/// Strictly increasing radii `r_1 < … < r_n = r_max` with `r_1 > 0`.
///
/// Quadrature integrates the piecewise cubic Lagrange interpolant through the
/// four nearest nodes (origin included as a node where the integrand is
/// zero) with two-point Gauss–Legendre on each interval; it is exact for
/// cubics (up to a trapezoid on `[0, r_1]` for strongly graded grids) and
/// supplies cumulative integrals as well as the total.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    r_max: f64,
    spacing: Spacing,
    nodes: Vec<f64>,
    /// per interval `[x_k, x_{k+1}]` of the extended node list `x_0 = 0, x_k = r_k`:
    /// stencil indices into the extended list and their weights.
    stencils: Vec<([usize; 4], [f64; 4])>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, n_points: usize) -> Result<Self> {
        check_params(r_max, n_points)?;
        let h = r_max / n_points as f64;
        let mut nodes: Vec<f64> = (1..=n_points).map(|i| i as f64 * h).collect();
        nodes[n_points - 1] = r_max;
        Self::build(r_max, Spacing::Uniform, nodes)
    }

    pub fn geometric(r_max: f64, n_points: usize, r_first: f64) -> Result<Self> {
        check_params(r_max, n_points)?;
        if !(r_first > 0.0 && r_first <= 1e-3 * r_max) {
            return Err(Error::invalid(format!(
                "geometric grid needs 0 < r_first <= 1e-3 r_max, got {r_first}"
            )));
        }
        let q = (r_max / r_first).powf(1.0 / (n_points - 1) as f64);
        let mut nodes: Vec<f64> = (0..n_points).map(|i| r_first * q.powi(i as i32)).collect();
        nodes[n_points - 1] = r_max;
        Self::build(r_max, Spacing::Geometric { r_first }, nodes)
    }

    pub fn with_spacing(r_max: f64, n_points: usize, spacing: Spacing) -> Result<Self> {
        match spacing {
            Spacing::Uniform => Self::uniform(r_max, n_points),
            Spacing::Geometric { r_first } => Self::geometric(r_max, n_points, r_first),
        }
    }

    fn build(r_max: f64, spacing: Spacing, nodes: Vec<f64>) -> Result<Self> {
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid nodes must be strictly increasing"));
        }
        if nodes[0] > 1e-3 * r_max {
            return Err(Error::invalid(format!(
                "first node {} exceeds 1e-3 r_max; use more points",
                nodes[0]
            )));
        }
        let n = nodes.len();
        let mut ext = Vec::with_capacity(n + 1);
        ext.push(0.0);
        ext.extend_from_slice(&nodes);

        let g = 0.5 / 3f64.sqrt();
        let mut stencils = Vec::with_capacity(n);
        let mut ext_weights = vec![0.0; n + 1];
        for k in 0..n {
            let idx = [0, 1, 2, 3].map(|j| j + k.saturating_sub(1).min(n - 3));
            if k == 0 && ext[2] - ext[1] < 0.5 * ext[1] {
                // strongly graded start: the cubic through the first nodes
                // extrapolates across [0, r_1], use the trapezoid there
                let w = [0.5 * ext[1], 0.5 * ext[1], 0.0, 0.0];
                ext_weights[0] += w[0];
                ext_weights[1] += w[1];
                stencils.push((idx, w));
                continue;
            }
            let xs = idx.map(|j| ext[j]);
            let (a, b) = (ext[k], ext[k + 1]);
            let h = b - a;
            let mid = 0.5 * (a + b);
            let mut w = [0.0; 4];
            for x in [mid - g * h, mid + g * h] {
                let l = lagrange_basis(&xs, x);
                for j in 0..4 {
                    w[j] += 0.5 * h * l[j];
                }
            }
            for j in 0..4 {
                ext_weights[idx[j]] += w[j];
            }
            stencils.push((idx, w));
        }
        let weights = ext_weights[1..].to_vec();
        Ok(Self { r_max, spacing, nodes, stencils, weights })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Node spacing for uniform grids.
    pub fn step(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Uniform => Some(self.r_max / self.nodes.len() as f64),
            Spacing::Geometric { .. } => None,
        }
    }

    /// Quadrature weights for `∫_0^{r_max} g(r) dr ≈ Σ w_i g(r_i)` (g(0) = 0).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        debug_assert_eq!(g.len(), self.len());
        self.weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// Running integrals `∫_0^{r_i} g(r) dr` at every node.
    pub fn cumulative(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.len());
        let value = |idx: usize| if idx == 0 { 0.0 } else { g[idx - 1] };
        let mut acc = 0.0;
        self.stencils
            .iter()
            .map(|(idx, w)| {
                acc += (0..4).map(|j| w[j] * value(idx[j])).sum::<f64>();
                acc
            })
            .collect()
    }

    /// Integral of `4π r² f(r)` over the ball of radius `r_max`.
    pub fn shell_integral(&self, f: &[f64]) -> f64 {
        let four_pi = 4.0 * std::f64::consts::PI;
        self.nodes
            .iter()
            .zip(f)
            .zip(&self.weights)
            .map(|((r, v), w)| w * four_pi * r * r * v)
            .sum()
    }

    /// Index `i` with `nodes[i] <= r < nodes[i + 1]`, clamped to valid intervals.
    pub(crate) fn locate(&self, r: f64) -> usize {
        let n = self.nodes.len();
        let i = match self.spacing {
            Spacing::Uniform => {
                let h = self.r_max / n as f64;
                let guess = ((r / h) as usize).saturating_sub(1);
                let mut i = guess.min(n - 2);
                while i > 0 && self.nodes[i] > r {
                    i -= 1;
                }
                while i + 2 < n && self.nodes[i + 1] <= r {
                    i += 1;
                }
                i
            }
            Spacing::Geometric { .. } => self.nodes.partition_point(|&x| x <= r).saturating_sub(1),
        };
        i.min(n - 2)
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.r_max == other.r_max && self.spacing == other.spacing && self.nodes == other.nodes
    }
}

fn check_params(r_max: f64, n_points: usize) -> Result<()> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
    }
    if n_points < 8 {
        return Err(Error::invalid(format!("need at least 8 grid points, got {n_points}")));
    }
    Ok(())
}

fn lagrange_basis(xs: &[f64; 4], x: f64) -> [f64; 4] {
    let mut l = [1.0; 4];
    for j in 0..4 {
        for m in 0..4 {
            if m != j {
                l[j] *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
    }
    l
}
