use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Parity, RadialGrid};

/// Closed-form continuation of a radial profile beyond `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    /// Keep the value at `r_max`.
    Hold,
    /// `q / r` (potential of an enclosed charge).
    Inverse { charge: f64 },
    /// `A e^{−κ r} / r`.
    Exponential { amplitude: f64, decay: f64 },
    /// `log A − κ r − log r`, the logarithm of [`Tail::Exponential`].
    LogExponential { log_amplitude: f64, decay: f64 },
    /// `−κ − 1/r`, the radial derivative of [`Tail::LogExponential`].
    LogDerivative { decay: f64 },
    /// `−2κ/r − 1/r²`, the radial Laplacian of [`Tail::LogExponential`].
    LaplaceLog { decay: f64 },
}

impl Tail {
    fn eval(&self, r: f64, last: f64) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::Hold => last,
            Tail::Inverse { charge } => charge / r,
            Tail::Exponential { amplitude, decay } => amplitude * (-decay * r).exp() / r,
            Tail::LogExponential { log_amplitude, decay } => log_amplitude - decay * r - r.ln(),
            Tail::LogDerivative { decay } => -decay - 1.0 / r,
            Tail::LaplaceLog { decay } => -2.0 * decay / r - 1.0 / (r * r),
        }
    }
}

/// Node values on a [`RadialGrid`] with a monotone (Fritsch–Carlson) cubic
/// interpolant. Below `r_1` the interpolant spans `[−r_1, r_1]` using the
/// parity; above `r_max` the [`Tail`] applies.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    parity: Parity,
    tail: Tail,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, parity: Parity, tail: Tail) -> Self {
        assert_eq!(grid.len(), values.len(), "one value per grid node");
        let slopes = pchip_slopes(grid.nodes(), &values, parity);
        Self { grid, values, slopes, parity, tail }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, parity: Parity, tail: Tail, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, parity, tail)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let x = self.grid.nodes();
        let n = x.len();
        if r >= x[n - 1] {
            if r == x[n - 1] {
                return self.values[n - 1];
            }
            return self.tail.eval(r, self.values[n - 1]);
        }
        if r < x[0] {
            let s = match self.parity {
                Parity::Even => 1.0,
                Parity::Odd => -1.0,
            };
            let (f1, d1) = (self.values[0], self.slopes[0]);
            return hermite(-x[0], x[0], s * f1, f1, -s * d1, d1, r);
        }
        let i = self.grid.locate(r);
        hermite(x[i], x[i + 1], self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1], r)
    }
}

#[inline]
fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}

fn pchip_slopes(x: &[f64], f: &[f64], parity: Parity) -> Vec<f64> {
    let n = x.len();
    let s = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    // secant to the left of node i (node 0 uses its mirror image)
    let secant = |i: usize| -> (f64, f64) {
        if i == 0 {
            (2.0 * x[0], (f[0] - s * f[0]) / (2.0 * x[0]))
        } else {
            let h = x[i] - x[i - 1];
            (h, (f[i] - f[i - 1]) / h)
        }
    };
    let mut d = vec![0.0; n];
    for i in 0..n - 1 {
        let (h0, s0) = secant(i);
        let (h1, s1) = secant(i + 1);
        d[i] = if s0 * s1 <= 0.0 {
            0.0
        } else {
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            (w1 + w2) / (w1 / s0 + w2 / s1)
        };
    }
    // one-sided three-point end condition
    let (h0, s0) = secant(n - 2);
    let (h1, s1) = secant(n - 1);
    let mut dn = ((2.0 * h1 + h0) * s1 - h1 * s0) / (h0 + h1);
    if dn * s1 <= 0.0 {
        dn = 0.0;
    } else if s0 * s1 <= 0.0 && dn.abs() > 3.0 * s1.abs() {
        dn = 3.0 * s1;
    }
    d[n - 1] = dn;
    // node 0: low-order fit respecting the parity (f = a + c r² or a r + c r³)
    let (x0, x1) = (x[0], x[1]);
    let d0 = match parity {
        Parity::Even => 2.0 * x0 * (f[1] - f[0]) / (x1 * x1 - x0 * x0),
        Parity::Odd => {
            let c = (f[1] / x1 - f[0] / x0) / (x1 * x1 - x0 * x0);
            let a = f[0] / x0 - c * x0 * x0;
            a + 3.0 * c * x0 * x0
        }
    };
    let (_, s1) = secant(1);
    d[0] = if d0 * s1 < 0.0 {
        0.0
    } else if d0.abs() > 3.0 * s1.abs() {
        3.0 * s1
    } else {
        d0
    };
    d
}
