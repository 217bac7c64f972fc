use std::f64::consts::PI;
use std::sync::Arc;

use crate::radial::{Parity, RadialFunction, RadialGrid, Spacing, Tail};
use crate::{Error, Result};

const MAX_INVERSE_ITERATIONS: usize = 200;

/// Lowest eigenpair of `−½u″ + W u = e u` with `u(0) = 0` and a Dirichlet
/// wall one grid step beyond `r_max`.
///
/// The returned `u = r ψ` is nonnegative with `∫ 4π u² dr = 1`, so `u / r`
/// is a normalized radial wave function.
///
/// The eigenvalue of the symmetric three-point discretization is bracketed
/// by Sturm bisection. On uniform grids the pair is then refined by shifted
/// inverse iteration on the Numerov discretization, which removes the
/// `O(h²)` error of the three-point stencil.
pub fn ground_state_radial(w: &RadialFunction, grid: &Arc<RadialGrid>) -> Result<(f64, RadialFunction)> {
    let r = grid.nodes();
    let wv: Vec<f64> = if Arc::ptr_eq(w.grid(), grid) || **w.grid() == **grid {
        w.values().to_vec()
    } else {
        r.iter().map(|&x| w.eval(x)).collect()
    };
    if let Some((i, v)) = wv.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(format!("potential {v} at node {i}")));
    }

    let (e_fd, u_fd) = three_point_ground_state(r, &wv)?;
    let (e, u) = match (grid.spacing(), grid.step()) {
        (Spacing::Uniform, Some(h)) => numerov_refine(h, r, &wv, e_fd, u_fd)?,
        _ => (e_fd, u_fd),
    };

    let mut u = u;
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u.iter_mut().for_each(|x| *x = x.abs());
    let sq: Vec<f64> = u.iter().map(|x| 4.0 * PI * x * x).collect();
    let norm = grid.integrate(&sq).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NonFinite(format!("eigenvector norm {norm}")));
    }
    u.iter_mut().for_each(|x| *x /= norm);
    Ok((e, RadialFunction::new(grid.clone(), u, Parity::Odd, Tail::Zero)))
}

/// Node spacings `h_k = x_{k+1} − x_k` over `0, r_1, …, r_n, r_n + (r_n − r_{n−1})`.
fn spacings(r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut h = Vec::with_capacity(n + 1);
    h.push(r[0]);
    for k in 1..n {
        h.push(r[k] - r[k - 1]);
    }
    h.push(r[n - 1] - r[n - 2]);
    h
}

/// Symmetric tridiagonal `S = M^{−1/2} K M^{−1/2}` of the finite-volume
/// discretization `K u = e M u`; returns (diag, offdiag, sqrt(M)).
fn symmetric_operator(r: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = r.len();
    let h = spacings(r);
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut sm = vec![0.0; n];
    for i in 0..n {
        let (hl, hr) = (h[i], h[i + 1]);
        let m = 0.5 * (hl + hr);
        sm[i] = m.sqrt();
        d[i] = (0.5 * (1.0 / hl + 1.0 / hr)) / m + w[i];
    }
    for i in 0..n - 1 {
        e[i] = -0.5 / h[i + 1] / (sm[i] * sm[i + 1]);
    }
    (d, e, sm)
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let q_prev = if q == 0.0 { f64::EPSILON * (d[i - 1].abs() + e[i - 1].abs()) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / q_prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn three_point_ground_state(r: &[f64], w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (d, e, sm) = symmetric_operator(r, w);
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let rad = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - rad);
        hi = hi.max(d[i] + rad);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&d, &e, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    // inverse iteration on the symmetric form
    let sub: Vec<f64> = e.clone();
    let diag: Vec<f64> = d.iter().map(|x| x - lambda).collect();
    let mut y = vec![1.0; n];
    for _ in 0..3 {
        let mut v = solve_tridiagonal(&sub, &diag, &sub, &y);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NoConvergence { iterations: 0, residual: f64::NAN });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        y = v;
    }
    let u = y.iter().zip(&sm).map(|(y, s)| y / s).collect();
    Ok((lambda, u))
}

/// Thomas algorithm for `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = f_i`
/// (`a` and `c` hold the `n − 1` off-diagonal entries). Zero pivots are
/// nudged, as is customary for inverse iteration at an exact eigenvalue.
fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], f: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut fp = vec![0.0; n];
    let guard = |p: f64, scale: f64| {
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        if p.abs() < tiny {
            if p < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            p
        }
    };
    let mut p = guard(b[0], b[0].abs() + c.first().map_or(0.0, |x| x.abs()));
    cp[0] = if n > 1 { c[0] / p } else { 0.0 };
    fp[0] = f[0] / p;
    for i in 1..n {
        let scale = b[i].abs() + a[i - 1].abs() + if i + 1 < n { c[i].abs() } else { 0.0 };
        p = guard(b[i] - a[i - 1] * cp[i - 1], scale);
        cp[i] = if i + 1 < n { c[i] / p } else { 0.0 };
        fp[i] = (f[i] - a[i - 1] * fp[i - 1]) / p;
    }
    let mut x = fp;
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}

/// Inverse iteration for the Numerov pencil `A u = e B u` with
/// `A = −½D₂/h² + B diag(W)`, `B = tridiag(1, 10, 1)/12`, shifted at the
/// three-point eigenvalue.
fn numerov_refine(h: f64, r: &[f64], w: &[f64], sigma: f64, u0: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    let n = r.len();
    let inv_h2 = 1.0 / (h * h);
    // A − σB as three diagonals
    let mut lower = vec![0.0; n - 1]; // entry (i, i−1)
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1]; // entry (i, i+1)
    for i in 0..n {
        diag[i] = inv_h2 + (10.0 / 12.0) * (w[i] - sigma);
        if i + 1 < n {
            upper[i] = -0.5 * inv_h2 + (w[i + 1] - sigma) / 12.0;
            lower[i] = -0.5 * inv_h2 + (w[i] - sigma) / 12.0;
        }
    }
    // (W u)(0) = lim r W · u′(0) with u′(0) ≈ (4u₁ − u₂)/(2h)
    let c0 = 2.0 * r[0] * w[0] - r[1] * w[1];
    diag[0] += c0 / (6.0 * h);
    upper[0] += -c0 / (24.0 * h);

    let apply_b = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let l = if i > 0 { u[i - 1] } else { 0.0 };
                let rr = if i + 1 < n { u[i + 1] } else { 0.0 };
                (l + 10.0 * u[i] + rr) / 12.0
            })
            .collect()
    };

    let unit = |mut v: Vec<f64>| -> Vec<f64> {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        v
    };
    let mut u = unit(u0);
    let mut e_prev = f64::NAN;
    let mut change = f64::INFINITY;
    for it in 0..MAX_INVERSE_ITERATIONS {
        let bu = apply_b(&u);
        let v = solve_tridiagonal(&lower, &diag, &upper, &bu);
        let bv = apply_b(&v);
        let num: f64 = bu.iter().zip(&bv).map(|(a, b)| a * b).sum();
        let den: f64 = bv.iter().map(|b| b * b).sum();
        let e = sigma + num / den;
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("Numerov eigenvalue at iteration {it}")));
        }
        let mut v = unit(v);
        if v.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let dv = v.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        change = (e - e_prev).abs();
        u = v;
        if change <= 1e-14 * (1.0 + e.abs()) && dv <= 1e-10 {
            return Ok((e, u));
        }
        e_prev = e;
    }
    Err(Error::NoConvergence { iterations: MAX_INVERSE_ITERATIONS, residual: change })
}
