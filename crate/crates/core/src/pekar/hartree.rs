use std::f64::consts::PI;

use super::WaveFunction;
use crate::radial::{Parity, RadialFunction, Tail};
use crate::{Error, Result};

/// `Φ(r) = ∫ ψ²(y)/|x−y| dy` by Newton's shell theorem:
/// `Φ(r) = q(r)/r + ∫_r^{r_max} 4π s ψ²(s) ds`, `q(r) = ∫_0^r 4π s² ψ²(s) ds`.
pub fn hartree_potential(psi: &WaveFunction) -> RadialFunction {
    let grid = psi.grid();
    let r = grid.nodes();
    let rho: Vec<f64> = psi.values().iter().map(|p| p * p).collect();
    let inner: Vec<f64> = r.iter().zip(&rho).map(|(r, d)| 4.0 * PI * r * r * d).collect();
    let outer: Vec<f64> = r.iter().zip(&rho).map(|(r, d)| 4.0 * PI * r * d).collect();
    let q = grid.cumulative(&inner);
    let o = grid.cumulative(&outer);
    let o_total = *o.last().unwrap();
    let phi: Vec<f64> = (0..r.len()).map(|i| q[i] / r[i] + (o_total - o[i])).collect();
    let charge = *q.last().unwrap();
    RadialFunction::new(grid.clone(), phi, Parity::Even, Tail::Inverse { charge })
}

/// [`hartree_potential`] plus, in debug builds, a comparison against a direct
/// angular-averaged quadrature at one interior node.
pub fn hartree_potential_checked(psi: &WaveFunction) -> Result<RadialFunction> {
    let phi = hartree_potential(psi);
    if cfg!(debug_assertions) {
        let nodes = psi.grid().nodes();
        let i = nodes.len() / 10;
        let r = nodes[i];
        let direct = direct_shell_potential(psi, r, 2000);
        let rel_err = ((phi.values()[i] - direct) / direct).abs();
        if !(rel_err <= 1e-4) {
            return Err(Error::GridTooCoarse { r, rel_err });
        }
    }
    Ok(phi)
}

/// `∫ 4π s² ψ²(s) / max(r, s) ds` by composite Simpson on `[0, r]` and
/// `[r, r_max]` over the interpolated profile.
pub(crate) fn direct_shell_potential(psi: &WaveFunction, r: f64, panels: usize) -> f64 {
    let r_max = psi.grid().r_max();
    let f = |s: f64| {
        let p = psi.eval(s);
        4.0 * PI * s * s * p * p / s.max(r)
    };
    simpson(&f, 0.0, r, panels) + simpson(&f, r, r_max, panels)
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = 2 * panels.max(1);
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
