use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::IncrementSample;
use crate::rng::stream;
use crate::stats;
use crate::{norm3, Error, Result, Vec3};

#[inline]
fn dist(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn mean_cross(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += dist(x, y);
        }
    }
    s / (a.len() * b.len()) as f64
}

/// V-statistic `2 E|X − Y| − E|X − X′| − E|Y − Y′|` (diagonals included),
/// nonnegative and exactly zero for identical samples.
pub fn energy_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    (2.0 * mean_cross(a, b) - mean_cross(a, a) - mean_cross(b, b)).max(0.0)
}

/// U-statistic version (diagonals excluded), unbiased for the population
/// energy distance; may be slightly negative.
pub fn energy_distance_unbiased(a: &[Vec3], b: &[Vec3]) -> f64 {
    let within = |x: &[Vec3]| {
        let n = x.len() as f64;
        mean_cross(x, x) * n / (n - 1.0)
    };
    2.0 * mean_cross(a, b) - within(a) - within(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub n_permutations: usize,
    /// Largest sample size used per side (random subsample above it).
    pub max_per_side: usize,
    pub seed: u64,
    /// Delete-one-block jackknife blocks for the error bar of the unbiased
    /// energy distance (0 disables).
    pub jackknife_blocks: usize,
}

impl Default for PermutationTest {
    fn default() -> Self {
        Self { n_permutations: 999, max_per_side: 1000, seed: 0, jackknife_blocks: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleResult {
    pub lag: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub energy_distance: f64,
    pub energy_distance_unbiased: f64,
    pub energy_distance_stderr: f64,
    pub energy_p_value: f64,
    /// KS statistic of the radii `|Δ|`.
    pub ks_radial: f64,
    pub ks_p_value: f64,
}

impl TwoSampleResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.energy_p_value < level
    }
}

fn subsample(v: &[Vec3], cap: usize, rng: &mut crate::rng::StreamRng) -> Vec<Vec3> {
    if v.len() <= cap {
        return v.to_vec();
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.partial_shuffle(rng, cap);
    let mut keep: Vec<usize> = idx[..cap].to_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| v[i]).collect()
}

/// Energy-distance and radial KS permutation tests of `a` against `b`.
pub fn two_sample_distance(a: &IncrementSample, b: &IncrementSample, test: &PermutationTest) -> Result<TwoSampleResult> {
    if (a.lag - b.lag).abs() > 1e-9 * a.lag.abs().max(1.0) {
        return Err(Error::LagMismatch(a.lag, b.lag));
    }
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::InsufficientSamples(format!("need 100 vectors per side, got {} and {}", a.len(), b.len())));
    }
    if test.n_permutations < 999 {
        return Err(Error::invalid("at least 999 permutations are required"));
    }
    let mut rng = stream(test.seed, 0);
    let xa = subsample(&a.vectors, test.max_per_side, &mut rng);
    let xb = subsample(&b.vectors, test.max_per_side, &mut rng);
    let (na, nb) = (xa.len(), xb.len());
    let pooled: Vec<Vec3> = xa.iter().chain(&xb).cloned().collect();
    let n = na + nb;

    // packed upper triangle of the pooled distance matrix
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(dist(&pooled[i], &pooled[j]));
        }
    }
    let radii: Vec<f64> = pooled.iter().map(norm3).collect();

    let stat = |labels: &[u8]| -> (f64, f64) {
        let mut sums = [0.0f64; 3];
        let mut k = 0;
        for i in 0..n {
            let li = labels[i] as usize;
            for j in i + 1..n {
                sums[li + labels[j] as usize] += d[k];
                k += 1;
            }
        }
        let (fa, fb) = (na as f64, nb as f64);
        let ed = 2.0 * sums[1] / (fa * fb) - 2.0 * sums[0] / (fa * fa) - 2.0 * sums[2] / (fb * fb);
        let (ra, rb): (Vec<f64>, Vec<f64>) = {
            let mut ra = Vec::with_capacity(na);
            let mut rb = Vec::with_capacity(nb);
            for (r, &l) in radii.iter().zip(labels) {
                if l == 0 {
                    ra.push(*r)
                } else {
                    rb.push(*r)
                }
            }
            (ra, rb)
        };
        (ed, stats::ks_statistic(&ra, &rb))
    };

    let mut labels: Vec<u8> = (0..n).map(|i| (i >= na) as u8).collect();
    let (ed_obs, ks_obs) = stat(&labels);
    let (mut ge_ed, mut ge_ks) = (0usize, 0usize);
    let tol = 1e-12 * ed_obs.abs().max(1e-300);
    for _ in 0..test.n_permutations {
        labels.shuffle(&mut rng);
        let (ed, ks) = stat(&labels);
        if ed >= ed_obs - tol {
            ge_ed += 1;
        }
        if ks >= ks_obs - 1e-12 {
            ge_ks += 1;
        }
    }
    let denom = (test.n_permutations + 1) as f64;

    let stderr = if test.jackknife_blocks >= 2 { jackknife(&xa, &xb, test.jackknife_blocks) } else { f64::NAN };
    Ok(TwoSampleResult {
        lag: a.lag,
        n_a: na,
        n_b: nb,
        energy_distance: energy_distance(&xa, &xb),
        energy_distance_unbiased: energy_distance_unbiased(&xa, &xb),
        energy_distance_stderr: stderr,
        energy_p_value: (1 + ge_ed) as f64 / denom,
        ks_radial: ks_obs,
        ks_p_value: (1 + ge_ks) as f64 / denom,
    })
}

/// Delete-one-block jackknife over contiguous blocks removed from both
/// samples at once.
fn jackknife(a: &[Vec3], b: &[Vec3], blocks: usize) -> f64 {
    let cut = |v: &[Vec3], k: usize| -> Vec<Vec3> {
        let (lo, hi) = (k * v.len() / blocks, (k + 1) * v.len() / blocks);
        v[..lo].iter().chain(&v[hi..]).cloned().collect()
    };
    let reps: Vec<f64> = (0..blocks).map(|k| energy_distance_unbiased(&cut(a, k), &cut(b, k))).collect();
    let m = stats::mean(&reps);
    let g = blocks as f64;
    ((g - 1.0) / g * reps.iter().map(|r| (r - m).powi(2)).sum::<f64>()).sqrt()
}
