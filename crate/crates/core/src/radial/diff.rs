use super::RadialGrid;

/// Symmetry of a radial profile under `r ↦ −r` (its Cartesian extension).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// First and second derivatives at every node from five-point Lagrange
/// stencils (Fornberg weights). Near the origin the stencil borrows mirrored
/// nodes `−r_k` using the declared parity; near `r_max` it is one-sided.
pub fn derivatives(grid: &RadialGrid, values: &[f64], parity: Parity) -> (Vec<f64>, Vec<f64>) {
    let r = grid.nodes();
    let n = r.len();
    const M: usize = 2;
    // extended abscissae: -r_2, -r_1, r_1, ..., r_n
    let x_at = |k: isize| -> (f64, f64) {
        if k < 0 {
            let j = (-k - 1) as usize;
            (-r[j], parity.sign() * values[j])
        } else {
            (r[k as usize], values[k as usize])
        }
    };
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let lo = (i as isize - M as isize).min(n as isize - 1 - 2 * M as isize);
        let mut xs = [0.0; 5];
        let mut fs = [0.0; 5];
        for (s, k) in (lo..lo + 5).enumerate() {
            let (x, f) = x_at(k);
            xs[s] = x;
            fs[s] = f;
        }
        let c = fornberg(r[i], &xs, 2);
        d1[i] = (0..5).map(|s| c[1][s] * fs[s]).sum();
        d2[i] = (0..5).map(|s| c[2][s] * fs[s]).sum();
    }
    (d1, d2)
}

/// Finite-difference weights for derivatives `0..=m` at `z` on abscissae `x`.
fn fornberg(z: f64, x: &[f64; 5], m: usize) -> Vec<[f64; 5]> {
    let n = x.len();
    let mut c = vec![[0.0; 5]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
