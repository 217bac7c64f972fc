use super::PathLattice;
use crate::{Error, Result, Vec3};

#[inline]
fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Precomputed pair coefficients of a lattice.
#[derive(Debug, Clone)]
pub struct Interaction {
    n: usize,
    coef: Vec<f64>,
    eta2: f64,
}

impl Interaction {
    pub fn new(lat: &PathLattice) -> Result<Self> {
        lat.validate()?;
        let n = lat.n_nodes();
        let mut coef = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                coef[i * n + j] = lat.pair_coefficient(i, j);
            }
        }
        Ok(Self { n, coef, eta2: lat.eta * lat.eta })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    #[inline]
    fn kernel(&self, i: usize, j: usize, a: &Vec3, b: &Vec3) -> Result<f64> {
        let s = self.eta2 + dist2(a, b);
        if s == 0.0 {
            return Err(Error::SingularPair { i: i.min(j), j: i.max(j) });
        }
        Ok(1.0 / s.sqrt())
    }

    /// `H = Σ_{i<j} c_ij V_η(x_i − x_j)`.
    pub fn energy(&self, x: &[Vec3]) -> Result<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut h = 0.0;
        for i in 0..self.n {
            let row = &self.coef[i * self.n..(i + 1) * self.n];
            for j in i + 1..self.n {
                h += row[j] * self.kernel(i, j, &x[i], &x[j])?;
            }
        }
        Ok(h)
    }

    /// `Σ_{j≠i} c_ij V_η(y − x_j)`.
    pub fn row_energy(&self, x: &[Vec3], i: usize, y: &Vec3) -> Result<f64> {
        let row = &self.coef[i * self.n..(i + 1) * self.n];
        let mut h = 0.0;
        for (j, xj) in x.iter().enumerate() {
            if j != i {
                h += row[j] * self.kernel(i, j, y, xj)?;
            }
        }
        Ok(h)
    }

    /// Change of `H` when node `i` moves to `y`.
    pub fn delta(&self, x: &[Vec3], i: usize, y: &Vec3) -> Result<f64> {
        Ok(self.row_energy(x, i, y)? - self.row_energy(x, i, &x[i])?)
    }
}

/// Full double sum for a path on `lat`.
pub fn interaction_energy(path: &[Vec3], lat: &PathLattice) -> Result<f64> {
    if path.len() != lat.n_nodes() {
        return Err(Error::invalid(format!("path has {} nodes, lattice {}", path.len(), lat.n_nodes())));
    }
    Interaction::new(lat)?.energy(path)
}

/// `H(path with x_i = x_new) − H(path)` in `O(N)`.
pub fn delta_energy(path: &[Vec3], lat: &PathLattice, i: usize, x_new: &Vec3) -> Result<f64> {
    lat.validate()?;
    if i == lat.pin_index() {
        return Err(Error::PinnedNode(i));
    }
    if i >= path.len() {
        return Err(Error::invalid(format!("node {i} out of range")));
    }
    let eta2 = lat.eta * lat.eta;
    let mut d = 0.0;
    for (j, xj) in path.iter().enumerate() {
        if j == i {
            continue;
        }
        let c = lat.pair_coefficient(i, j);
        let s_new = eta2 + dist2(x_new, xj);
        let s_old = eta2 + dist2(&path[i], xj);
        if s_new == 0.0 || s_old == 0.0 {
            return Err(Error::SingularPair { i: i.min(j), j: i.max(j) });
        }
        d += c * (1.0 / s_new.sqrt() - 1.0 / s_old.sqrt());
    }
    Ok(d)
}
