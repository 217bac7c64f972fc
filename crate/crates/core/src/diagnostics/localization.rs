use serde::{Deserialize, Serialize};

use crate::stats::{self, Estimate};
use crate::Vec3;

const MAX_POINTS: usize = 10_000;

/// Bounded, continuous interaction kernel with `V(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizationKernel {
    /// `exp(−|x|² / (2 w²))`.
    GaussianBump { width: f64 },
    /// `η V_η(x) = η / √(η² + |x|²)`.
    Coulomb { eta: f64 },
}

impl LocalizationKernel {
    #[inline]
    pub fn eval(&self, d2: f64) -> f64 {
        match *self {
            LocalizationKernel::GaussianBump { width } => (-0.5 * d2 / (width * width)).exp(),
            LocalizationKernel::Coulomb { eta } => eta / (eta * eta + d2).sqrt(),
        }
    }
}

/// `Ψ(V) = ∬ V(y₁ − y₂) L(dy₁) L(dy₂)` for the empirical measure `L` of the
/// points (diagonal included). Above 10⁴ points an evenly strided subsample
/// is used.
pub fn localization_functional(points: &[Vec3], kernel: LocalizationKernel) -> f64 {
    if points.is_empty() {
        return f64::NAN;
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let pts: Vec<Vec3> = points.iter().step_by(stride).cloned().collect();
    let n = pts.len();
    let mut off = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = [pts[i][0] - pts[j][0], pts[i][1] - pts[j][1], pts[i][2] - pts[j][2]];
            off += kernel.eval(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        }
    }
    (n as f64 * kernel.eval(0.0) + 2.0 * off) / (n * n) as f64
}

/// Average of the functional over independent point clouds (e.g. sampled
/// paths), with its standard error.
pub fn mean_localization(clouds: &[Vec<Vec3>], kernel: LocalizationKernel) -> Estimate {
    let v: Vec<f64> = clouds.iter().map(|c| localization_functional(c, kernel)).collect();
    stats::mean_stderr(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_mass_gives_v0() {
        let pts = vec![[1.0, 2.0, 3.0]; 17];
        for k in [LocalizationKernel::GaussianBump { width: 0.5 }, LocalizationKernel::Coulomb { eta: 0.3 }] {
            assert_eq!(localization_functional(&pts, k), 1.0);
        }
    }

    #[test]
    fn two_tight_clusters() {
        let k = LocalizationKernel::GaussianBump { width: 1.0 };
        let d = 1.5;
        let mut pts = Vec::new();
        for i in 0..200 {
            let jitter = 1e-4 * (i as f64 / 200.0 - 0.5);
            pts.push([jitter, 0.0, 0.0]);
            pts.push([d + jitter, 0.0, 0.0]);
        }
        let v = localization_functional(&pts, k);
        let expected = 0.5 * (1.0 + k.eval(d * d));
        assert!((v - expected).abs() < 1e-6, "{v} vs {expected}");
        let far: Vec<Vec3> = pts.iter().map(|p| if p[0] > 1.0 { [p[0] + 1e3, 0.0, 0.0] } else { *p }).collect();
        assert!((localization_functional(&far, k) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn subsamples_large_inputs() {
        let pts: Vec<Vec3> = (0..25_000).map(|i| [(i % 100) as f64 * 0.01, 0.0, 0.0]).collect();
        let v = localization_functional(&pts, LocalizationKernel::Coulomb { eta: 0.1 });
        assert!(v > 0.0 && v <= 1.0);
    }

    proptest! {
        #[test]
        fn translation_invariant(
            pts in proptest::collection::vec([-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64], 2..40),
            shift in [-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64],
        ) {
            let k = LocalizationKernel::GaussianBump { width: 1.0 };
            let moved: Vec<Vec3> = pts.iter().map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]]).collect();
            let (a, b) = (localization_functional(&pts, k), localization_functional(&moved, k));
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a > 0.0 && a <= 1.0);
        }
    }
}
