//! Euler–Maruyama simulation of the Pekar process
//!
//! `dX = (∇ψ/ψ)(X) dt + dB`, stationary under `ψ²(x) dx`, together with the
//! Girsanov log-density of its path law against Brownian motion.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::IncrementSample;
use crate::pekar::PsiField;
use crate::rng::{stream, StreamRng};
use crate::{norm3, Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLaw {
    /// `X_0 ~ ψ²`.
    Stationary,
    /// `X_0 = 0`.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Pekar,
    OuTest,
    Brownian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiffusionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Largest drift magnitude applied.
    pub drift_clamp: f64,
    /// Keep every `record_every`-th point (the last step must be kept).
    pub record_every: usize,
    pub start: StartLaw,
    /// Drop the drift entirely (Brownian motion with the chosen start law).
    pub zero_drift: bool,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_steps: 10_000,
            n_paths: 1000,
            seed: 0,
            drift_clamp: 50.0,
            record_every: 10,
            start: StartLaw::Stationary,
            zero_drift: false,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.drift_clamp > 0.0) {
            return Err(Error::invalid("drift_clamp must be positive"));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::invalid("n_steps and n_paths must be positive"));
        }
        if self.record_every == 0 || self.n_steps % self.record_every != 0 {
            return Err(Error::invalid(format!(
                "record_every ({}) must divide n_steps ({})",
                self.record_every, self.n_steps
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Recorded trajectories, stored as start point plus displacement from it
/// so that a global translation only touches the start points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub starts: Vec<Vec3>,
    /// `X_k − X_0` at every recorded point, per path.
    pub displacements: Vec<Vec<Vec3>>,
    /// Time between recorded points.
    pub dt: f64,
    pub source: Source,
    /// Number of Euler steps whose drift hit the clamp.
    pub clamped: u64,
}

impl TrajectorySample {
    pub fn n_paths(&self) -> usize {
        self.starts.len()
    }

    pub fn n_points(&self) -> usize {
        self.displacements.first().map_or(0, |d| d.len())
    }

    pub fn total_time(&self) -> f64 {
        (self.n_points().saturating_sub(1)) as f64 * self.dt
    }

    pub fn point(&self, path: usize, k: usize) -> Vec3 {
        let (s, d) = (self.starts[path], self.displacements[path][k]);
        [s[0] + d[0], s[1] + d[1], s[2] + d[2]]
    }

    pub fn path(&self, path: usize) -> Vec<Vec3> {
        (0..self.n_points()).map(|k| self.point(path, k)).collect()
    }

    pub fn translate(&mut self, c: Vec3) {
        for s in &mut self.starts {
            *s = [s[0] + c[0], s[1] + c[1], s[2] + c[2]];
        }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }
}

fn gaussian3(rng: &mut StreamRng) -> Vec3 {
    [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

/// `X ~ ψ²`: radius by inverse CDF, direction uniform on the sphere.
pub fn sample_stationary_start(field: &PsiField, rng: &mut StreamRng) -> Vec3 {
    let r = field.radius_quantile(rng.random::<f64>());
    let mut g = gaussian3(rng);
    let mut n = norm3(&g);
    while n == 0.0 {
        g = gaussian3(rng);
        n = norm3(&g);
    }
    [r * g[0] / n, r * g[1] / n, r * g[2] / n]
}

struct PathRun {
    start: Vec3,
    displacements: Vec<Vec3>,
    clamped: u64,
    log_weight: f64,
}

fn run_path(field: &PsiField, cfg: &DiffusionConfig, id: u64, girsanov: bool) -> PathRun {
    let mut rng = stream(cfg.seed, id);
    let x0 = match cfg.start {
        StartLaw::Stationary => sample_stationary_start(field, &mut rng),
        StartLaw::Origin => [0.0; 3],
    };
    let sq = cfg.dt.sqrt();
    let mut x = x0;
    let mut displacements = Vec::with_capacity(cfg.n_steps / cfg.record_every + 1);
    displacements.push([0.0; 3]);
    let mut clamped = 0;
    let mut integral = 0.0;
    for k in 0..cfg.n_steps {
        let r = norm3(&x);
        let mut b = if cfg.zero_drift || r == 0.0 { 0.0 } else { field.drift(r) };
        if girsanov {
            let bb = field.drift(r);
            integral += (field.laplace_log(r) + bb * bb) * cfg.dt;
        }
        if b.abs() > cfg.drift_clamp {
            b = b.signum() * cfg.drift_clamp;
            clamped += 1;
        }
        let xi = gaussian3(&mut rng);
        let f = if r == 0.0 { 0.0 } else { b / r * cfg.dt };
        for a in 0..3 {
            x[a] += f * x[a] + sq * xi[a];
        }
        if (k + 1) % cfg.record_every == 0 {
            displacements.push([x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]]);
        }
    }
    let log_weight = if girsanov {
        field.log_psi(norm3(&x)) - field.log_psi(norm3(&x0)) - 0.5 * integral
    } else {
        0.0
    };
    PathRun { start: x0, displacements, clamped, log_weight }
}

fn collect(runs: Vec<PathRun>, cfg: &DiffusionConfig, source: Source) -> (TrajectorySample, Vec<f64>) {
    let mut starts = Vec::with_capacity(runs.len());
    let mut displacements = Vec::with_capacity(runs.len());
    let mut weights = Vec::with_capacity(runs.len());
    let mut clamped = 0;
    for r in runs {
        starts.push(r.start);
        displacements.push(r.displacements);
        weights.push(r.log_weight);
        clamped += r.clamped;
    }
    let traj = TrajectorySample { starts, displacements, dt: cfg.dt * cfg.record_every as f64, source, clamped };
    (traj, weights)
}

/// Euler–Maruyama paths of `dX = b(|X|) X/|X| dt + dB`, one RNG stream per path.
pub fn simulate_pekar(field: &PsiField, cfg: &DiffusionConfig) -> Result<TrajectorySample> {
    cfg.validate()?;
    let source = if cfg.zero_drift { Source::Brownian } else { Source::Pekar };
    let runs: Vec<PathRun> = (0..cfg.n_paths as u64).into_par_iter().map(|p| run_path(field, cfg, p, false)).collect();
    Ok(collect(runs, cfg, source).0)
}

/// Simulates like [`simulate_pekar`] and accumulates the Girsanov
/// log-density of every path along the full-resolution Euler grid. Typically
/// used with `zero_drift` to reweight Brownian paths into the Pekar law.
pub fn simulate_with_girsanov(field: &PsiField, cfg: &DiffusionConfig) -> Result<(TrajectorySample, Vec<f64>)> {
    cfg.validate()?;
    let source = if cfg.zero_drift { Source::Brownian } else { Source::Pekar };
    let runs: Vec<PathRun> = (0..cfg.n_paths as u64).into_par_iter().map(|p| run_path(field, cfg, p, true)).collect();
    let (traj, g) = collect(runs, cfg, source);
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("Girsanov log-density of path {i}")));
    }
    Ok((traj, g))
}

/// `G = log ψ(x_N) − log ψ(x_0) − ½ Σ_{k<N} [Δ log ψ(x_k) + |∇ log ψ(x_k)|²] dt`.
pub fn girsanov_log_density(path: &[Vec3], field: &PsiField, dt: f64) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::invalid("empty path"));
    }
    let mut integral = 0.0;
    for x in &path[..path.len() - 1] {
        let r = norm3(x);
        let b = field.drift(r);
        integral += (field.laplace_log(r) + b * b) * dt;
    }
    let g = field.log_psi(norm3(&path[path.len() - 1])) - field.log_psi(norm3(&path[0])) - 0.5 * integral;
    if !g.is_finite() {
        return Err(Error::NonFinite("Girsanov log-density".into()));
    }
    Ok(g)
}

/// Increments over non-overlapping windows of every path.
pub fn increments(traj: &TrajectorySample, lags: &[f64]) -> Result<Vec<IncrementSample>> {
    lags.iter().map(|&lag| increments_with_stride(traj, lag, None)).collect()
}

/// Increments `X(t + ℓ) − X(t)` for window starts `t = 0, s, 2s, …`
/// (`s = ℓ` by default, one recorded step for `ℓ = 0`).
pub fn increments_with_stride(traj: &TrajectorySample, lag: f64, stride: Option<f64>) -> Result<IncrementSample> {
    let m = steps(traj, lag)?;
    let s = match stride {
        Some(s) => steps(traj, s)?.max(1),
        None => m.max(1),
    };
    let n = traj.n_points();
    let mut vectors = Vec::new();
    for d in &traj.displacements {
        let mut k = 0;
        while k + m < n {
            let (a, b) = (d[k + m], d[k]);
            vectors.push([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
            k += s;
        }
    }
    let tag = match traj.source {
        Source::Pekar => "pekar",
        Source::OuTest => "ou_test",
        Source::Brownian => "brownian",
    };
    Ok(IncrementSample::new(lag, vectors, tag))
}

fn steps(traj: &TrajectorySample, lag: f64) -> Result<usize> {
    let span = traj.total_time();
    if !(lag >= 0.0) {
        return Err(Error::invalid(format!("lag must be nonnegative, got {lag}")));
    }
    if lag > span * (1.0 + 1e-12) {
        return Err(Error::LagTooLong { lag, span });
    }
    let m = lag / traj.dt;
    let k = m.round();
    if (m - k).abs() > 1e-9 * m.max(1.0) {
        return Err(Error::invalid(format!("lag {lag} is not a multiple of the recorded step {}", traj.dt)));
    }
    Ok(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pekar::gaussian;
    use crate::radial::RadialGrid;
    use crate::stats;
    use std::sync::Arc;

    fn gaussian_field(lambda: f64) -> PsiField {
        let grid = Arc::new(RadialGrid::uniform(20.0, 2000).unwrap());
        PsiField::new(&gaussian(grid, lambda).unwrap()).unwrap()
    }

    #[test]
    fn stationary_start_moments() {
        let lambda = 1.0;
        let field = gaussian_field(lambda);
        let mut rng = stream(11, 0);
        let pts: Vec<Vec3> = (0..100_000).map(|_| sample_stationary_start(&field, &mut rng)).collect();
        for a in 0..3 {
            let xs: Vec<f64> = pts.iter().map(|p| p[a]).collect();
            let m = stats::mean_stderr(&xs);
            assert!(m.value.abs() < 3.0 * m.stderr, "mean axis {a}: {m:?}");
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let v = stats::mean_stderr(&sq);
            assert!((v.value - 0.5 / lambda).abs() < 3.0 * v.stderr, "var axis {a}: {v:?}");
        }
        let median = field.radius_quantile(0.5);
        let below = pts.iter().filter(|p| norm3(p) <= median).count() as f64 / pts.len() as f64;
        assert!((below - 0.5).abs() < 3.0 * (0.25f64 / pts.len() as f64).sqrt());
    }

    #[test]
    fn gaussian_girsanov_closed_form() {
        let lambda = 0.8;
        let field = gaussian_field(lambda);
        let path: Vec<Vec3> = (0..20).map(|k| [0.1 * k as f64, -0.05 * k as f64, 0.3]).collect();
        let dt = 0.01;
        let g = girsanov_log_density(&path, &field, dt).unwrap();
        let sq = |x: &Vec3| x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let mut expected = -0.5 * lambda * (sq(&path[19]) - sq(&path[0]));
        for x in &path[..19] {
            expected += (1.5 * lambda - 0.5 * lambda * lambda * sq(x)) * dt;
        }
        assert!((g - expected).abs() < 1e-6, "{g} vs {expected}");
        let still = vec![[0.0; 3]; 101];
        let g0 = girsanov_log_density(&still, &field, dt).unwrap();
        assert!((g0 - 1.5 * lambda * 1.0).abs() < 1e-6);
    }

    #[test]
    fn inline_girsanov_matches_path_formula() {
        let field = gaussian_field(1.0);
        let cfg = DiffusionConfig { n_steps: 200, n_paths: 5, record_every: 1, zero_drift: true, ..Default::default() };
        let (traj, g) = simulate_with_girsanov(&field, &cfg).unwrap();
        for p in 0..traj.n_paths() {
            let direct = girsanov_log_density(&traj.path(p), &field, cfg.dt).unwrap();
            assert!((direct - g[p]).abs() < 1e-9, "{direct} vs {}", g[p]);
        }
    }

    #[test]
    fn increments_are_translation_invariant_and_vanish_at_lag_zero() {
        let field = gaussian_field(1.0);
        let cfg = DiffusionConfig { n_steps: 1000, n_paths: 8, record_every: 10, ..Default::default() };
        let traj = simulate_pekar(&field, &cfg).unwrap();
        assert_eq!(traj.n_points(), 101);
        let lags = [0.0, 0.1, 0.5];
        let a = increments(&traj, &lags).unwrap();
        let mut shifted = traj.clone();
        shifted.translate([5.0, 5.0, 5.0]);
        assert_eq!(a, increments(&shifted, &lags).unwrap());
        assert!(a[0].vectors.iter().all(|v| *v == [0.0; 3]));
        assert_eq!(a[2].vectors.len(), 8 * 2);
        assert!(matches!(increments(&traj, &[2.0]), Err(Error::LagTooLong { .. })));
        assert!(increments(&traj, &[0.015]).is_err());
        let dense = increments_with_stride(&traj, 0.5, Some(0.01)).unwrap();
        assert_eq!(dense.vectors.len(), 8 * 51);
    }

    #[test]
    fn determinism_and_config_checks() {
        let field = gaussian_field(1.0);
        let cfg = DiffusionConfig { n_steps: 100, n_paths: 4, record_every: 10, seed: 3, ..Default::default() };
        assert_eq!(simulate_pekar(&field, &cfg).unwrap(), simulate_pekar(&field, &cfg).unwrap());
        assert!(DiffusionConfig { record_every: 7, ..cfg.clone() }.validate().is_err());
        assert!(DiffusionConfig { dt: 0.0, ..cfg.clone() }.validate().is_err());
        let origin = DiffusionConfig { start: StartLaw::Origin, ..cfg };
        let t = simulate_pekar(&field, &origin).unwrap();
        assert!(t.starts.iter().all(|s| *s == [0.0; 3]));
    }

    #[test]
    fn drift_clamp_is_counted() {
        let field = gaussian_field(1.0);
        let cfg = DiffusionConfig { n_steps: 10, n_paths: 50, record_every: 10, drift_clamp: 0.1, ..Default::default() };
        let t = simulate_pekar(&field, &cfg).unwrap();
        assert!(t.clamped > 0);
    }
}
